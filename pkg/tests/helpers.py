import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from se3filter.lie import Pose, angle_axis_to_rotation, skew

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
twist6 = arrays(np.float64, 6, elements=finite)
unit_quat = arrays(np.float64, 4, elements=st.floats(-1.0, 1.0)).filter(lambda q: np.linalg.norm(q) > 1e-3)


def rotation_from_quat(q):
    w, x, y, z = np.asarray(q) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])  # fmt: skip


def random_rotation(rng):
    return rotation_from_quat(rng.standard_normal(4))


def random_pose(rng, scale=5.0):
    return Pose(random_rotation(rng), scale * rng.standard_normal(3))


def random_rotation_away_from_pi(rng, max_angle=np.radians(170.0)):
    u = rng.standard_normal(3)
    return angle_axis_to_rotation(rng.uniform(0.0, max_angle), u / np.linalg.norm(u))


def wong_zakai_oracle(rho, q, h=1e-6):
    """Brute-force sum_k sum_j (q_j / 2) G_kj dG_ij/drho_k with central differences of G."""
    G = lambda r: 0.5 * (np.eye(3) + skew(r) + np.outer(r, r))
    G0 = G(rho)
    dG = [(G(rho + h * e) - G(rho - h * e)) / (2 * h) for e in np.eye(3)]
    out = np.zeros(3)
    for i in range(3):
        out[i] = sum(0.5 * q[j] * G0[k, j] * dG[k][i, j] for k in range(3) for j in range(3))
    return out


def noise_free(cfg, **changes):
    """``cfg`` with all sensor noise and vector biases removed; rate biases kept."""
    return cfg.replace(
        gyro_std=0.0, velocity_std=0.0, landmark_std=0.0, direction_std=0.0,
        landmark_bias=((0.0, 0.0, 0.0),), direction_bias=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        **changes,
    )  # fmt: skip


# One "PASS/FAIL criterion ..." line per acceptance check, echoed in the terminal summary.
VERDICTS = []


def verdict(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    VERDICTS.append(line)
    print(line)
    return ok
