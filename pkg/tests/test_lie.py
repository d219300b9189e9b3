import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_pose, random_rotation, rotation_from_quat, twist6, unit_quat, vec3
from se3filter.errors import InvalidArgument, SingularAttitude
from se3filter.lie import (
    Pose,
    adjoint_action,
    adjoint_matrix,
    angle_axis_to_rotation,
    antisym_project,
    distance_so3,
    pose_compose,
    pose_exp,
    pose_inverse,
    project_to_so3,
    rodriguez_to_rotation,
    rotation_to_rodriguez,
    skew,
    upsilon,
    upsilon_a,
    vex,
    wedge,
)

RX90 = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
RZ180 = np.diag([-1.0, -1.0, 1.0])


def expm_series(A, terms=30):
    # scaling and squaring around a plain Taylor sum; independent of the closed form
    n = max(0, int(np.ceil(np.log2(max(np.linalg.norm(A), 1e-16)))) + 1)
    A = A / 2**n
    out, term = np.eye(len(A)), np.eye(len(A))
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    for _ in range(n):
        out = out @ out
    return out


class TestSkewVex:
    def test_skew_example(self):
        np.testing.assert_array_equal(skew([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])

    def test_skew_zero(self):
        np.testing.assert_array_equal(skew(np.zeros(3)), np.zeros((3, 3)))

    @given(vec3, vec3)
    def test_skew_is_cross(self, a, b):
        np.testing.assert_allclose(skew(a) @ b, np.cross(a, b), atol=1e-12)
        np.testing.assert_array_equal(skew(a), -skew(a).T)

    @pytest.mark.parametrize("a", [[1.0, 2.0, 3.0], [0.0, 0.0, 0.0], [-4.5, 0.25, 7.0]])
    def test_vex_inverts_skew(self, a):
        np.testing.assert_array_equal(vex(skew(a)), a)

    def test_vex_round_trip_random(self):
        rng = np.random.default_rng(1)
        for a in rng.standard_normal((100, 3)):
            np.testing.assert_allclose(vex(skew(a)), a, atol=1e-14)

    def test_vex_rejects_symmetric_part(self):
        with pytest.raises(InvalidArgument):
            vex(np.eye(3))

    def test_vex_tolerates_tiny_asymmetry(self):
        A = skew([1.0, 2.0, 3.0]) + 1e-12 * np.eye(3)
        np.testing.assert_allclose(vex(A), [1.0, 2.0, 3.0])

    def test_skew_rejects_wrong_shape(self):
        with pytest.raises(InvalidArgument):
            skew([1.0, 2.0])


class TestWedgeUpsilon:
    def test_wedge_zero(self):
        np.testing.assert_array_equal(wedge(np.zeros(6)), np.zeros((4, 4)))

    def test_wedge_z_rotation(self):
        M = wedge([0, 0, 1, 0, 0, 0])
        np.testing.assert_array_equal(M[:2, :2], [[0, -1], [1, 0]])
        assert np.count_nonzero(M) == 2

    @given(twist6)
    def test_wedge_blocks(self, y):
        M = wedge(y)
        np.testing.assert_array_equal(M[:3, :3], skew(y[:3]))
        np.testing.assert_array_equal(M[:3, 3], y[3:])
        np.testing.assert_array_equal(M[3], np.zeros(4))

    @given(twist6)
    def test_upsilon_inverts_wedge(self, y):
        np.testing.assert_array_equal(upsilon(wedge(y)), y)

    def test_upsilon_identity(self):
        np.testing.assert_array_equal(upsilon(np.eye(4)), np.zeros(6))

    def test_upsilon_of_pose_error_blocks(self):
        rng = np.random.default_rng(2)
        T = random_pose(rng)
        np.testing.assert_allclose(upsilon(T), np.concatenate([upsilon_a(T.R), T.P]))
        np.testing.assert_allclose(upsilon(T.matrix()), upsilon(T))

    def test_antisym_project_cases(self):
        S = np.array([[1.0, 2.0, 3.0], [2.0, 5.0, 6.0], [3.0, 6.0, 9.0]])
        np.testing.assert_array_equal(antisym_project(S), np.zeros((3, 3)))
        A = skew([0.3, -1.0, 2.0])
        np.testing.assert_array_equal(antisym_project(A), A)
        M = np.arange(9.0).reshape(3, 3)
        np.testing.assert_allclose(antisym_project(M), (M - M.T) / 2)

    def test_upsilon_a_examples(self):
        np.testing.assert_array_equal(upsilon_a(np.eye(3)), np.zeros(3))
        np.testing.assert_allclose(upsilon_a(rodriguez_to_rotation([1.0, 0.0, 0.0])), [1.0, 0.0, 0.0], atol=1e-15)


class TestDistanceAndParameterizations:
    def test_distance_extremes(self):
        assert distance_so3(np.eye(3)) == 0.0
        assert distance_so3(RZ180) == 1.0

    def test_angle_axis_identity(self):
        np.testing.assert_allclose(angle_axis_to_rotation(0.0, [0.0, 1.0, 0.0]), np.eye(3))

    def test_angle_axis_quarter_turn(self):
        np.testing.assert_allclose(angle_axis_to_rotation(np.pi / 2, [1.0, 0.0, 0.0]), RX90, atol=1e-15)

    def test_angle_axis_reference_initial_estimate(self):
        u = np.array([3.0, 10.0, 8.0])
        R = angle_axis_to_rotation(np.radians(170.0), u / np.linalg.norm(u))
        expected = [[-0.8816, 0.2386, 0.4074], [0.4498, 0.1625, 0.8782], [0.1433, 0.9574, -0.2505]]
        np.testing.assert_allclose(R, expected, atol=5e-4)
        assert distance_so3(R) > 0.99

    def test_angle_axis_rejects_non_unit_axis(self):
        with pytest.raises(InvalidArgument):
            angle_axis_to_rotation(0.3, [1.0, 1.0, 0.0])

    def test_rodriguez_examples(self):
        np.testing.assert_array_equal(rodriguez_to_rotation(np.zeros(3)), np.eye(3))
        np.testing.assert_allclose(rodriguez_to_rotation([1.0, 0.0, 0.0]), RX90, atol=1e-15)
        np.testing.assert_array_equal(rotation_to_rodriguez(np.eye(3)), np.zeros(3))
        np.testing.assert_allclose(rotation_to_rodriguez(RX90), [1.0, 0.0, 0.0])

    def test_rodriguez_pole_raises(self):
        with pytest.raises(SingularAttitude):
            rotation_to_rodriguez(RZ180)

    @given(vec3)
    def test_rodriguez_is_rotation(self, rho):
        R = rodriguez_to_rotation(rho)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)

    @given(unit_quat)
    def test_rodriguez_round_trip_from_rotation(self, q):
        R = rotation_from_quat(q)
        if 1.0 + np.trace(R) < 1e-3:
            return  # Rodriguez vector blows up near the pole
        np.testing.assert_allclose(rodriguez_to_rotation(rotation_to_rodriguez(R)), R, atol=1e-9)

    def test_project_to_so3_fixes_drift(self):
        rng = np.random.default_rng(3)
        R = random_rotation(rng)
        Rp = project_to_so3(R + 1e-6 * rng.standard_normal((3, 3)))
        np.testing.assert_allclose(Rp.T @ Rp, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(Rp, R, atol=1e-5)


class TestPoseGroup:
    def test_inverse_and_identity(self):
        rng = np.random.default_rng(4)
        a, b = random_pose(rng), random_pose(rng)
        I = pose_compose(a, pose_inverse(a))
        np.testing.assert_allclose(I.matrix(), np.eye(4), atol=1e-12)
        np.testing.assert_array_equal((Pose.identity() @ b).matrix(), b.matrix())

    def test_associativity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a, b, c = (random_pose(rng) for _ in range(3))
            np.testing.assert_allclose(((a @ b) @ c).matrix(), (a @ (b @ c)).matrix(), atol=1e-12)

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(6)
        a, b = random_pose(rng), random_pose(rng)
        np.testing.assert_allclose((a @ b).matrix(), a.matrix() @ b.matrix(), atol=1e-12)
        np.testing.assert_allclose(a.inverse().matrix(), np.linalg.inv(a.matrix()), atol=1e-12)

    def test_from_matrix_round_trip(self):
        T = random_pose(np.random.default_rng(7))
        assert Pose.from_matrix(T.matrix()).matrix().tolist() == T.matrix().tolist()

    def test_pose_is_read_only(self):
        T = Pose.identity()
        with pytest.raises(ValueError):
            T.R[0, 0] = 2.0


class TestAdjoint:
    def test_identity(self):
        np.testing.assert_array_equal(adjoint_matrix(Pose.identity()), np.eye(6))
        M = wedge([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        np.testing.assert_array_equal(adjoint_action(Pose.identity(), M), M)

    def test_homomorphism_and_inverse(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            a, b = random_pose(rng), random_pose(rng)
            np.testing.assert_allclose(adjoint_matrix(a @ b), adjoint_matrix(a) @ adjoint_matrix(b), atol=1e-10)
            np.testing.assert_allclose(adjoint_matrix(a) @ adjoint_matrix(a.inverse()), np.eye(6), atol=1e-10)

    @settings(max_examples=50)
    @given(unit_quat, vec3, twist6)
    def test_conjugation_matches_adjoint(self, q, P, y):
        T = Pose(rotation_from_quat(q), P)
        lhs = adjoint_action(T, wedge(y))
        np.testing.assert_allclose(lhs, wedge(adjoint_matrix(T) @ y), atol=1e-9)
        np.testing.assert_allclose(upsilon(lhs), adjoint_matrix(T) @ y, atol=1e-9)

    def test_rejects_non_algebra_element(self):
        with pytest.raises(InvalidArgument):
            adjoint_action(Pose.identity(), np.eye(4))


class TestPoseExp:
    def test_zero_twist(self):
        np.testing.assert_array_equal(pose_exp(np.zeros(6), 0.3).matrix(), np.eye(4))

    def test_pure_yaw(self):
        w, dt = 0.7, 0.4
        T = pose_exp([0.0, 0.0, w, 0.0, 0.0, 0.0], dt)
        c, s = np.cos(w * dt), np.sin(w * dt)
        np.testing.assert_allclose(T.R, [[c, -s, 0], [s, c, 0], [0, 0, 1]], atol=1e-15)
        np.testing.assert_array_equal(T.P, np.zeros(3))

    @pytest.mark.parametrize("scale", [1e-7, 1e-5, 1e-3, 0.5, 3.0])
    def test_matches_series_exponential(self, scale):
        # covers both the Taylor branch and the closed form
        rng = np.random.default_rng(9)
        y = rng.standard_normal(6)
        np.testing.assert_allclose(pose_exp(y, scale).matrix(), expm_series(wedge(y) * scale), atol=1e-12)

    def test_second_order_remainder(self):
        y = np.array([0.3, -0.2, 0.5, 1.0, 0.0, -2.0])
        rem = [np.linalg.norm(pose_exp(y, dt).matrix() - np.eye(4) - dt * wedge(y)) for dt in (1e-2, 5e-3)]
        assert rem[0] / rem[1] == pytest.approx(4.0, rel=0.05)

    def test_negative_dt_rejected(self):
        with pytest.raises(InvalidArgument):
            pose_exp(np.zeros(6), -1.0)

    def test_long_composition_stays_orthogonal(self):
        from se3filter.truth import TruthPropagator

        prop = TruthPropagator(Pose.identity())
        rng = np.random.default_rng(10)
        twists = rng.standard_normal((30_000, 6))
        T = prop.advance(twists, 1e-3)
        assert T.orthogonality_error() <= 1e-9
        assert abs(np.linalg.det(T.R) - 1.0) <= 1e-9


class TestIdentities:
    @given(vec3, vec3)
    def test_double_skew(self, a, b):
        np.testing.assert_allclose(-skew(b) @ skew(a), (b @ a) * np.eye(3) - np.outer(a, b), atol=1e-12 * (1 + abs(a).max() * abs(b).max()))

    @given(unit_quat, vec3)
    def test_skew_conjugation(self, q, a):
        R = rotation_from_quat(q)
        np.testing.assert_allclose(skew(R @ a), R @ skew(a) @ R.T, atol=1e-12 * (1 + abs(a).max()))

    @given(vec3)
    def test_distance_and_upsilon_from_rodriguez(self, rho):
        n2 = rho @ rho
        R = rodriguez_to_rotation(rho)
        assert distance_so3(R) == pytest.approx(n2 / (1 + n2), abs=1e-12)
        np.testing.assert_allclose(upsilon_a(R), 2 * rho / (1 + n2), atol=1e-12)

    @given(unit_quat)
    def test_upsilon_norm(self, q):
        R = rotation_from_quat(q)
        d = distance_so3(R)
        assert upsilon_a(R) @ upsilon_a(R) == pytest.approx(4 * (1 - d) * d, abs=1e-12)

    @given(st.floats(0.0, np.radians(179.0)), unit_quat)
    def test_angle_axis_agrees_with_rodriguez(self, alpha, q):
        u = np.asarray(q[1:]) if np.linalg.norm(q[1:]) > 1e-3 else np.array([0.0, 0.0, 1.0])
        u = u / np.linalg.norm(u)
        np.testing.assert_allclose(angle_axis_to_rotation(alpha, u), rodriguez_to_rotation(np.tan(alpha / 2) * u), atol=1e-10)
