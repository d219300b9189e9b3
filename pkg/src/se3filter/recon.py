"""Algebraic pose reconstruction from one measurement frame."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateGeometry, InvalidArgument
from .lie import Pose
from .sensors import LandmarkSet, MeasurementFrame

_RANK_TOL = 1e-10


def wahba_svd(body: ArrayLike, inertial: ArrayLike, weights: ArrayLike | None = None) -> NDArray[np.float64]:
    """Rotation ``R`` minimizing ``1 - sum(s_i b_i^T R^T r_i)``.

    Parameters
    ----------
    body, inertial : array-like, shape (n, 3)
        Paired unit vectors, ``body ~= R^T inertial``.
    weights : array-like, shape (n,), optional
        Positive confidence levels; normalized to sum to one. Uniform when
        omitted.

    Returns
    -------
    ndarray, shape (3, 3)
        A proper rotation (determinant +1), even for inputs whose best
        orthogonal fit is a reflection.

    Raises
    ------
    DegenerateGeometry
        If the attitude profile matrix has rank below two.
    """
    b = np.asarray(body, dtype=np.float64).reshape(-1, 3)
    r = np.asarray(inertial, dtype=np.float64).reshape(-1, 3)
    if len(b) != len(r) or len(b) == 0:
        raise InvalidArgument("body and inertial sets must be non-empty and paired")
    s = np.full(len(b), 1.0 / len(b)) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if s.shape != (len(b),) or np.any(s <= 0):
        raise InvalidArgument("confidence weights must be positive, one per pair")
    s = s / s.sum()

    B = (b * s[:, None]).T @ r
    U, S, Vt = np.linalg.svd(B)
    if S[0] == 0.0 or S[1] <= _RANK_TOL * S[0]:
        raise DegenerateGeometry("vector pairs span fewer than two directions")
    V = Vt.T
    U_plus = U * np.array([1.0, 1.0, np.linalg.det(U)])
    V_plus = V * np.array([1.0, 1.0, np.linalg.det(V)])
    return V_plus @ U_plus.T


def reconstruct_position(
    R_y: ArrayLike, frame: MeasurementFrame | ArrayLike, landmarks: LandmarkSet
) -> NDArray[np.float64]:
    """Weighted mean of ``v_I - R_y v_B`` over the landmarks.

    ``frame`` is a :class:`MeasurementFrame` or the (n, 3) array of body-frame
    landmark measurements.
    """
    R_y = np.asarray(R_y, dtype=np.float64)
    if isinstance(frame, MeasurementFrame):
        frame = frame.landmarks_body
    vb = np.asarray(frame, dtype=np.float64).reshape(-1, 3)
    if len(vb) != len(landmarks.points):
        raise InvalidArgument("one body-frame measurement per landmark is required")
    k = landmarks.weights
    return k @ (landmarks.points - vb @ R_y.T) / k.sum()


def reconstruct_pose(frame: MeasurementFrame, landmarks: LandmarkSet, weights: ArrayLike | None = None) -> Pose:
    """Measured pose ``T_y`` from the frame's direction pairs and landmarks."""
    R_y = wahba_svd(frame.directions_body, frame.directions_inertial, weights)
    return Pose(R_y, reconstruct_position(R_y, frame, landmarks))
