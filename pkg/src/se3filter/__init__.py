"""Nonlinear deterministic and stochastic pose filters on SE(3), with a simulation harness."""

from ._backend import BACKEND
from .errors import ConfigError, DegenerateGeometry, InvalidArgument, Se3FilterError, SingularAttitude
from .filters import (
    ErrorDiagnostics,
    FilterGains,
    FilterState,
    det_correction,
    det_step,
    lyapunov_det,
    lyapunov_stoch,
    pose_error,
    stoch_correction,
    stoch_step,
)
from .lie import Pose, pose_exp
from .recon import reconstruct_pose, wahba_svd

__all__ = [
    "BACKEND",
    "ConfigError",
    "DegenerateGeometry",
    "ErrorDiagnostics",
    "FilterGains",
    "FilterState",
    "InvalidArgument",
    "Pose",
    "Se3FilterError",
    "SingularAttitude",
    "det_correction",
    "det_step",
    "lyapunov_det",
    "lyapunov_stoch",
    "pose_error",
    "pose_exp",
    "reconstruct_pose",
    "stoch_correction",
    "stoch_step",
    "wahba_svd",
]
__version__ = "0.1.0"
