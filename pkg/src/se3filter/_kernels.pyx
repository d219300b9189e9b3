# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-step kernels; same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt

cnp.import_array()

cdef double POLE_CLAMP = 1.0 - 1e-6


cdef inline void _exp_coeffs(double theta, double* a, double* b, double* c) noexcept nogil:
    cdef double t2, s, co
    if theta < 1e-4:
        t2 = theta * theta
        a[0] = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b[0] = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c[0] = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        s = sin(theta)
        co = cos(theta)
        a[0] = s / theta
        b[0] = (1.0 - co) / (theta * theta)
        c[0] = (theta - s) / (theta * theta * theta)


cdef void _exp(const double* w, const double* v, double dt, double* R, double* P) noexcept nogil:
    # R, P: row-major 3x3 and 3 outputs
    cdef double phi[3]
    cdef double K[9]
    cdef double K2[9]
    cdef double J[9]
    cdef double a, b, c, theta
    cdef int i, j, k
    for i in range(3):
        phi[i] = w[i] * dt
    theta = sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    _exp_coeffs(theta, &a, &b, &c)
    K[0] = 0.0; K[1] = -phi[2]; K[2] = phi[1]
    K[3] = phi[2]; K[4] = 0.0; K[5] = -phi[0]
    K[6] = -phi[1]; K[7] = phi[0]; K[8] = 0.0
    for i in range(3):
        for j in range(3):
            K2[3 * i + j] = 0.0
            for k in range(3):
                K2[3 * i + j] += K[3 * i + k] * K[3 * k + j]
    for i in range(9):
        R[i] = a * K[i] + b * K2[i]
        J[i] = b * K[i] + c * K2[i]
    for i in range(3):
        R[4 * i] += 1.0
        J[4 * i] += 1.0
    for i in range(3):
        P[i] = (J[3 * i] * v[0] + J[3 * i + 1] * v[1] + J[3 * i + 2] * v[2]) * dt


cdef inline void _compose(double* R, double* P, const double* dR, const double* dP) noexcept nogil:
    # (R, P) <- (R dR, R dP + P)
    cdef double Rn[9]
    cdef double Pn[3]
    cdef int i, j, k
    for i in range(3):
        Pn[i] = P[i]
        for k in range(3):
            Pn[i] += R[3 * i + k] * dP[k]
        for j in range(3):
            Rn[3 * i + j] = 0.0
            for k in range(3):
                Rn[3 * i + j] += R[3 * i + k] * dR[3 * k + j]
    for i in range(9):
        R[i] = Rn[i]
    for i in range(3):
        P[i] = Pn[i]


cdef inline void _cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _rt_mul(const double* R, const double* x, double* out) noexcept nogil:
    # out = R^T x
    cdef int i
    for i in range(3):
        out[i] = R[i] * x[0] + R[3 + i] * x[1] + R[6 + i] * x[2]


cdef void _ad_inv_apply(const double* R, const double* P, const double* x, double* out) noexcept nogil:
    cdef double t[3]
    cdef double u[3]
    cdef int i
    _rt_mul(R, x, out)
    _cross(P, x, t)
    for i in range(3):
        u[i] = x[3 + i] - t[i]
    _rt_mul(R, u, out + 3)


cdef void _ad_transpose_apply(const double* R, const double* P, const double* x, double* out) noexcept nogil:
    cdef double t[3]
    cdef double u[3]
    cdef int i
    _cross(P, x + 3, t)
    for i in range(3):
        u[i] = x[i] - t[i]
    _rt_mul(R, u, out)
    _rt_mul(R, x + 3, out + 3)


cdef struct ErrorTerms:
    double Rt[9]
    double Pt[3]
    double RtPt[3]   # R~^T P~
    double ua[3]
    double d
    double inv       # 1 / (1 - min(d, POLE_CLAMP))


cdef void _error_terms(const double* Rh, const double* Ph, const double* Ry, const double* Py,
                       ErrorTerms* e) noexcept nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            e.Rt[3 * i + j] = 0.0
            for k in range(3):
                e.Rt[3 * i + j] += Ry[3 * i + k] * Rh[3 * j + k]
    for i in range(3):
        e.Pt[i] = Py[i]
        for k in range(3):
            e.Pt[i] -= e.Rt[3 * i + k] * Ph[k]
    _rt_mul(e.Rt, e.Pt, e.RtPt)
    e.d = 0.25 * (3.0 - e.Rt[0] - e.Rt[4] - e.Rt[8])
    e.inv = 1.0 / (1.0 - (e.d if e.d < POLE_CLAMP else POLE_CLAMP))
    e.ua[0] = 0.5 * (e.Rt[7] - e.Rt[5])
    e.ua[1] = 0.5 * (e.Rt[2] - e.Rt[6])
    e.ua[2] = 0.5 * (e.Rt[3] - e.Rt[1])


cdef inline void _load(object arr, double* out, int n):
    cdef const double[::1] view = np.ascontiguousarray(arr, dtype=np.float64).reshape(-1)
    cdef int i
    if view.shape[0] != n:
        raise ValueError(f"expected {n} values, got {view.shape[0]}")
    for i in range(n):
        out[i] = view[i]


cdef object _mat(const double* R):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((3, 3))
    cdef int i, j
    for i in range(3):
        for j in range(3):
            out[i, j] = R[3 * i + j]
    return out


cdef object _vec(const double* x, int n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef int i
    for i in range(n):
        out[i] = x[i]
    return out


def se3_exp(omega, v, double dt):
    cdef double w[3]
    cdef double vv[3]
    cdef double R[9]
    cdef double P[3]
    _load(omega, w, 3)
    _load(v, vv, 3)
    _exp(w, vv, dt, R, P)
    return _mat(R), _vec(P, 3)


def integrate_truth(R0, P0, twists, double dt):
    cdef double R[9]
    cdef double P[3]
    cdef double dR[9]
    cdef double dP[3]
    cdef const double[:, ::1] tw = np.ascontiguousarray(twists, dtype=np.float64).reshape(-1, 6)
    cdef Py_ssize_t n = tw.shape[0], k
    _load(R0, R, 9)
    _load(P0, P, 3)
    with nogil:
        for k in range(n):
            _exp(&tw[k, 0], &tw[k, 3], dt, dR, dP)
            _compose(R, P, dR, dP)
    return _mat(R), _vec(P, 3)


def det_step(R_hat, P_hat, b, R_y, P_y, y_m, double gamma, double k_b, double k_p, double k_w, double dt):
    cdef double Rh[9]
    cdef double Ph[3]
    cdef double bh[6]
    cdef double Ry[9]
    cdef double Py[3]
    cdef double ym[6]
    cdef double x[6]
    cdef double W[6]
    cdef double bd[6]
    cdef double tw[6]
    cdef double dR[9]
    cdef double dP[3]
    cdef ErrorTerms e
    cdef int i
    _load(R_hat, Rh, 9)
    _load(P_hat, Ph, 3)
    _load(b, bh, 6)
    _load(R_y, Ry, 9)
    _load(P_y, Py, 3)
    _load(y_m, ym, 6)
    with nogil:
        _error_terms(Rh, Ph, Ry, Py, &e)
        for i in range(3):
            x[i] = (2.0 - e.d) * e.inv * e.ua[i]
            x[3 + i] = e.RtPt[i]
        _ad_inv_apply(Rh, Ph, x, W)
        for i in range(3):
            x[i] = e.d * e.ua[i]
            x[3 + i] = 4.0 * e.RtPt[i]
        _ad_transpose_apply(Rh, Ph, x, bd)
        for i in range(6):
            bd[i] = -gamma * bd[i] - k_b * gamma * bh[i]
            tw[i] = ym[i] - bh[i] + k_w * k_p * W[i]
        _exp(tw, tw + 3, dt, dR, dP)
        _compose(Rh, Ph, dR, dP)
        for i in range(6):
            bh[i] += dt * bd[i]
    return _mat(Rh), _vec(Ph, 3), _vec(bh, 6)


def stoch_step(R_hat, P_hat, b, sigma, R_y, P_y, y_m, double gamma, double pi_bar, double k_b,
               double k_sigma, double k_p, double k_w, double eps, double dt):
    cdef double Rh[9]
    cdef double Ph[3]
    cdef double bh[6]
    cdef double sh[6]
    cdef double Ry[9]
    cdef double Py[3]
    cdef double ym[6]
    cdef double x[6]
    cdef double W[6]
    cdef double C[6]
    cdef double bd[6]
    cdef double sd[6]
    cdef double tw[6]
    cdef double dR[9]
    cdef double dP[3]
    cdef double ssum, pn2, ua2
    cdef ErrorTerms e
    cdef int i
    _load(R_hat, Rh, 9)
    _load(P_hat, Ph, 3)
    _load(b, bh, 6)
    _load(sigma, sh, 6)
    _load(R_y, Ry, 9)
    _load(P_y, Py, 3)
    _load(y_m, ym, 6)
    with nogil:
        _error_terms(Rh, Ph, Ry, Py, &e)
        ssum = sh[0] + sh[1] + sh[2]
        pn2 = e.Pt[0] * e.Pt[0] + e.Pt[1] * e.Pt[1] + e.Pt[2] * e.Pt[2]
        ua2 = e.ua[0] * e.ua[0] + e.ua[1] * e.ua[1] + e.ua[2] * e.ua[2]
        # correction W
        for i in range(3):
            x[i] = (2.0 - e.d) * e.inv * e.ua[i] / eps + e.ua[i] * ssum
            x[3 + i] = e.RtPt[i] / eps
        _ad_inv_apply(Rh, Ph, x, W)
        # covariance-bound compensation
        for i in range(3):
            x[i] = 0.5 * e.inv * e.ua[i] * sh[i]
            x[3 + i] = 0.0
        _ad_inv_apply(Rh, Ph, x, C)
        # bias rate
        for i in range(3):
            x[i] = e.d * e.ua[i]
            x[3 + i] = 4.0 * pn2 * e.RtPt[i]
        _ad_transpose_apply(Rh, Ph, x, bd)
        for i in range(6):
            bd[i] = -gamma * bd[i] - k_b * gamma * bh[i]
        # covariance-bound rate
        for i in range(3):
            sd[i] = pi_bar * (0.25 * e.d * e.inv * e.ua[i] * e.ua[i] + k_w * k_p * e.d * ua2) - k_sigma * pi_bar * sh[i]
            sd[3 + i] = -k_sigma * pi_bar * sh[3 + i]
        for i in range(6):
            tw[i] = ym[i] - bh[i] + k_w * k_p * W[i] + C[i]
        _exp(tw, tw + 3, dt, dR, dP)
        _compose(Rh, Ph, dR, dP)
        for i in range(6):
            bh[i] += dt * bd[i]
            sh[i] += dt * sd[i]
    return _mat(Rh), _vec(Ph, 3), _vec(bh, 6), _vec(sh, 6)
