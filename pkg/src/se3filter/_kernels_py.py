"""Pure-numpy implementation of the per-step kernels.

Selected by :mod:`se3filter._backend` when the compiled extension is missing
or ``SE3FILTER_PURE_PYTHON`` is set. Every function here has a twin with the
same signature in ``_kernels.pyx``.
"""

from __future__ import annotations

import numpy as np

from .lie import _so3_exp_coeffs, skew, upsilon_a

# Keeps every 1 / (1 - ||R~||_I) factor finite.
POLE_CLAMP = 1.0 - 1e-6


def se3_exp(omega, v, dt):
    phi = np.asarray(omega, dtype=np.float64) * dt
    theta = float(np.sqrt(phi @ phi))
    a, b, c = _so3_exp_coeffs(theta)
    K = skew(phi)
    K2 = K @ K
    R = np.eye(3) + a * K + b * K2
    J = np.eye(3) + b * K + c * K2
    return R, J @ (np.asarray(v, dtype=np.float64) * dt)


def integrate_truth(R, P, twists, dt):
    """Right-multiply ``(R, P)`` by the exponential of each twist row in turn."""
    R = np.array(R, dtype=np.float64)
    P = np.array(P, dtype=np.float64)
    for y in np.asarray(twists, dtype=np.float64):
        dR, dP = se3_exp(y[:3], y[3:], dt)
        P = R @ dP + P
        R = R @ dR
    return R, P


def ad_inv_apply(R, P, x):
    """``Ad(T^-1) @ x`` without forming the 6x6 matrix."""
    a, c = x[:3], x[3:]
    return np.concatenate([R.T @ a, R.T @ (c - np.cross(P, a))])


def ad_transpose_apply(R, P, x):
    """``Ad(T).T @ x``."""
    a, c = x[:3], x[3:]
    return np.concatenate([R.T @ (a - np.cross(P, c)), R.T @ c])


def error_terms(R_hat, P_hat, R_y, P_y):
    """``R~ = R_y R_hat^T``, ``P~ = P_y - R~ P_hat``, ``||R~||_I`` and ``upsilon_a(R~)``."""
    R_t = R_y @ R_hat.T
    P_t = P_y - R_t @ P_hat
    d = 0.25 * (3.0 - np.trace(R_t))
    return R_t, P_t, d, upsilon_a(R_t)


def det_correction(R_hat, P_hat, R_t, P_t, k_p):
    d = 0.25 * (3.0 - np.trace(R_t))
    inv = 1.0 / (1.0 - min(d, POLE_CLAMP))
    x = np.concatenate([(2.0 - d) * inv * upsilon_a(R_t), R_t.T @ P_t])
    return k_p * ad_inv_apply(R_hat, P_hat, x)


def stoch_correction(R_hat, P_hat, R_t, P_t, sigma, k_p, eps):
    d = 0.25 * (3.0 - np.trace(R_t))
    inv = 1.0 / (1.0 - min(d, POLE_CLAMP))
    ua = upsilon_a(R_t)
    x = np.concatenate([(2.0 - d) * inv * ua / eps + ua * np.sum(sigma[:3]), R_t.T @ P_t / eps])
    return k_p * ad_inv_apply(R_hat, P_hat, x)


def sigma_compensation(R_hat, P_hat, R_t, sigma):
    d = 0.25 * (3.0 - np.trace(R_t))
    inv = 1.0 / (1.0 - min(d, POLE_CLAMP))
    x = np.concatenate([0.5 * inv * upsilon_a(R_t) * sigma[:3], np.zeros(3)])
    return ad_inv_apply(R_hat, P_hat, x)


def det_bias_rate(R_hat, P_hat, R_t, P_t, b, gamma, k_b):
    d = 0.25 * (3.0 - np.trace(R_t))
    x = np.concatenate([d * upsilon_a(R_t), 4.0 * (R_t.T @ P_t)])
    return -gamma * ad_transpose_apply(R_hat, P_hat, x) - k_b * gamma * b


def stoch_bias_rate(R_hat, P_hat, R_t, P_t, b, gamma, k_b):
    d = 0.25 * (3.0 - np.trace(R_t))
    x = np.concatenate([d * upsilon_a(R_t), 4.0 * (P_t @ P_t) * (R_t.T @ P_t)])
    return -gamma * ad_transpose_apply(R_hat, P_hat, x) - k_b * gamma * b


def sigma_rate(R_t, sigma, pi_bar, k_sigma, k_p, k_w):
    d = 0.25 * (3.0 - np.trace(R_t))
    inv = 1.0 / (1.0 - min(d, POLE_CLAMP))
    ua = upsilon_a(R_t)
    drive = np.zeros(6)
    drive[:3] = 0.25 * d * inv * ua * ua + k_w * k_p * d * (ua @ ua)
    return pi_bar * drive - k_sigma * pi_bar * np.asarray(sigma)


def det_step(R_hat, P_hat, b, R_y, P_y, y_m, gamma, k_b, k_p, k_w, dt):
    R_hat = np.asarray(R_hat, dtype=np.float64)
    P_hat = np.asarray(P_hat, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    R_t, P_t, _, _ = error_terms(R_hat, P_hat, np.asarray(R_y, dtype=np.float64), np.asarray(P_y, dtype=np.float64))
    W = det_correction(R_hat, P_hat, R_t, P_t, k_p)
    b_dot = det_bias_rate(R_hat, P_hat, R_t, P_t, b, gamma, k_b)
    twist = np.asarray(y_m, dtype=np.float64) - b + k_w * W
    dR, dP = se3_exp(twist[:3], twist[3:], dt)
    return R_hat @ dR, R_hat @ dP + P_hat, b + dt * b_dot


def stoch_step(R_hat, P_hat, b, sigma, R_y, P_y, y_m, gamma, pi_bar, k_b, k_sigma, k_p, k_w, eps, dt):
    R_hat = np.asarray(R_hat, dtype=np.float64)
    P_hat = np.asarray(P_hat, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    R_t, P_t, _, _ = error_terms(R_hat, P_hat, np.asarray(R_y, dtype=np.float64), np.asarray(P_y, dtype=np.float64))
    W = stoch_correction(R_hat, P_hat, R_t, P_t, sigma, k_p, eps)
    comp = sigma_compensation(R_hat, P_hat, R_t, sigma)
    b_dot = stoch_bias_rate(R_hat, P_hat, R_t, P_t, b, gamma, k_b)
    s_dot = sigma_rate(R_t, sigma, pi_bar, k_sigma, k_p, k_w)
    twist = np.asarray(y_m, dtype=np.float64) - b + k_w * W + comp
    dR, dP = se3_exp(twist[:3], twist[3:], dt)
    return R_hat @ dR, R_hat @ dP + P_hat, b + dt * b_dot, sigma + dt * s_dot
