"""
Small-matrix operations on SO(3) and SE(3).

Conventions
-----------
* Vectors are float64 arrays of shape (3,) or (6,).
* A twist is the 6-vector ``[omega, v]`` (angular first, body frame).
* ``Pose`` stores the rotation ``R`` and position ``P`` separately; the 4x4
  homogeneous matrix is assembled on demand.
* The 6x6 adjoint uses the ``[[R, 0], [skew(P) R, R]]`` block layout, so
  ``T wedge(y) T^-1 == wedge(adjoint_matrix(T) @ y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidArgument, SingularAttitude

# 1 + Tr(R) below this has no finite Rodriguez vector.
RODRIGUEZ_POLE_TOL = 1e-9
_ANTISYM_TOL = 1e-9
_UNIT_TOL = 1e-9


def _vec(a: ArrayLike, n: int, name: str) -> NDArray[np.float64]:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (n,):
        raise InvalidArgument(f"{name} must have shape ({n},), got {a.shape}")
    return a


def skew(a: ArrayLike) -> NDArray[np.float64]:
    """Cross-product matrix, ``skew(a) @ b == np.cross(a, b)``."""
    x, y, z = _vec(a, 3, "a")
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vex(A: ArrayLike) -> NDArray[np.float64]:
    """Inverse of :func:`skew`.

    Raises
    ------
    InvalidArgument
        If ``A`` is not antisymmetric to within 1e-9 (Frobenius norm of
        ``A + A.T``).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (3, 3):
        raise InvalidArgument(f"vex expects a 3x3 matrix, got {A.shape}")
    if np.linalg.norm(A + A.T) > _ANTISYM_TOL:
        raise InvalidArgument("vex expects an antisymmetric matrix")
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def wedge(y: ArrayLike) -> NDArray[np.float64]:
    """Map a twist ``[omega, v]`` to its 4x4 se(3) matrix."""
    y = _vec(y, 6, "twist")
    M = np.zeros((4, 4))
    M[:3, :3] = skew(y[:3])
    M[:3, 3] = y[3:]
    return M


def antisym_project(M: ArrayLike) -> NDArray[np.float64]:
    """Antisymmetric part ``(M - M.T) / 2`` of a 3x3 matrix."""
    M = np.asarray(M, dtype=np.float64)
    return 0.5 * (M - M.T)


def upsilon_a(M: ArrayLike) -> NDArray[np.float64]:
    """``vex`` of the antisymmetric part of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def upsilon(M: ArrayLike) -> NDArray[np.float64]:
    """Stack ``upsilon_a`` of the upper-left block over the upper-right column.

    Accepts a 4x4 matrix or a :class:`Pose`.
    """
    if isinstance(M, Pose):
        return np.concatenate([upsilon_a(M.R), M.P])
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (4, 4):
        raise InvalidArgument(f"upsilon expects a 4x4 matrix, got {M.shape}")
    return np.concatenate([upsilon_a(M[:3, :3]), M[:3, 3]])


def distance_so3(R: ArrayLike) -> float:
    """Normalized Euclidean distance ``Tr(I - R) / 4``, in [0, 1] for rotations."""
    R = np.asarray(R, dtype=np.float64)
    return 0.25 * (3.0 - np.trace(R))


def angle_axis_to_rotation(alpha: float, u: ArrayLike) -> NDArray[np.float64]:
    """Rotation by ``alpha`` radians about the unit axis ``u``."""
    u = _vec(u, 3, "u")
    if abs(np.linalg.norm(u) - 1.0) > _UNIT_TOL:
        raise InvalidArgument("rotation axis must be a unit vector")
    K = skew(u)
    return np.eye(3) + np.sin(alpha) * K + (1.0 - np.cos(alpha)) * (K @ K)


def rodriguez_to_rotation(rho: ArrayLike) -> NDArray[np.float64]:
    """Rotation matrix of the Rodriguez (Gibbs) vector ``rho = tan(a/2) u``."""
    rho = _vec(rho, 3, "rho")
    n2 = rho @ rho
    return ((1.0 - n2) * np.eye(3) + 2.0 * np.outer(rho, rho) + 2.0 * skew(rho)) / (1.0 + n2)


def rotation_to_rodriguez(R: ArrayLike) -> NDArray[np.float64]:
    """Rodriguez vector of ``R``.

    Uses ``rho = vex(R - R.T) / (1 + Tr R)``, which inverts
    :func:`rodriguez_to_rotation` exactly on SO(3).

    Raises
    ------
    SingularAttitude
        If ``1 + Tr(R) <= 1e-9`` (rotation angle at pi).
    """
    R = np.asarray(R, dtype=np.float64)
    den = 1.0 + np.trace(R)
    if den <= RODRIGUEZ_POLE_TOL:
        raise SingularAttitude(f"rotation angle at pi (1 + Tr R = {den:.3e})")
    return np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) / den


def project_to_so3(M: ArrayLike) -> NDArray[np.float64]:
    """Nearest rotation matrix (polar factor) of a 3x3 matrix."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=np.float64))
    D = np.diag([1.0, 1.0, np.linalg.det(U @ Vt)])
    return U @ D @ Vt


@dataclass(frozen=True)
class Pose:
    """Element of SE(3): rotation ``R`` (3x3) and position ``P`` (3,) in metres."""

    R: NDArray[np.float64]
    P: NDArray[np.float64]

    def __post_init__(self) -> None:
        R = np.array(self.R, dtype=np.float64)
        P = np.array(self.P, dtype=np.float64).reshape(3)
        if R.shape != (3, 3):
            raise InvalidArgument(f"rotation must be 3x3, got {R.shape}")
        R.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "P", P)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T: ArrayLike) -> Pose:
        T = np.asarray(T, dtype=np.float64)
        if T.shape != (4, 4):
            raise InvalidArgument(f"homogeneous matrix must be 4x4, got {T.shape}")
        return cls(T[:3, :3], T[:3, 3])

    def matrix(self) -> NDArray[np.float64]:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.P
        return T

    def inverse(self) -> Pose:
        return pose_inverse(self)

    def __matmul__(self, other: Pose) -> Pose:
        return pose_compose(self, other)

    def orthogonality_error(self) -> float:
        """``||R^T R - I||`` (Frobenius)."""
        return float(np.linalg.norm(self.R.T @ self.R - np.eye(3)))


def pose_compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.R @ b.R, a.R @ b.P + a.P)


def pose_inverse(a: Pose) -> Pose:
    Rt = a.R.T
    return Pose(Rt, -Rt @ a.P)


def adjoint_matrix(T: Pose) -> NDArray[np.float64]:
    """6x6 adjoint ``[[R, 0], [skew(P) R, R]]`` acting on ``[omega, v]``."""
    A = np.zeros((6, 6))
    A[:3, :3] = T.R
    A[3:, 3:] = T.R
    A[3:, :3] = skew(T.P) @ T.R
    return A


def adjoint_action(T: Pose, M: ArrayLike) -> NDArray[np.float64]:
    """Conjugation ``T M T^-1`` of an se(3) matrix.

    Raises
    ------
    InvalidArgument
        If ``M`` does not have se(3) structure (antisymmetric upper-left
        block, zero bottom row).
    """
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (4, 4):
        raise InvalidArgument(f"se(3) element must be 4x4, got {M.shape}")
    if np.linalg.norm(M[:3, :3] + M[:3, :3].T) > _ANTISYM_TOL or np.any(np.abs(M[3]) > _ANTISYM_TOL):
        raise InvalidArgument("matrix is not an element of se(3)")
    Tm = T.matrix()
    return Tm @ M @ pose_inverse(T).matrix()


def _so3_exp_coeffs(theta: float) -> tuple[float, float, float]:
    """Coefficients ``sin(t)/t``, ``(1-cos t)/t^2``, ``(t - sin t)/t^3``."""
    if theta < 1e-4:
        t2 = theta * theta
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / (theta * theta), (theta - s) / (theta**3)


def pose_exp(y: ArrayLike, dt: float) -> Pose:
    """Closed-form ``expm(dt * wedge(y))`` for a constant twist ``y``."""
    if dt < 0:
        raise InvalidArgument("dt must be non-negative")
    y = _vec(y, 6, "twist")
    phi = y[:3] * dt
    theta = float(np.linalg.norm(phi))
    a, b, c = _so3_exp_coeffs(theta)
    K = skew(phi)
    K2 = K @ K
    R = np.eye(3) + a * K + b * K2
    J = np.eye(3) + b * K + c * K2
    return Pose(R, J @ (y[3:] * dt))
