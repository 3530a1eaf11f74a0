import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bimanual_pong.trajectory_algebra import (
    InvalidHorizonError,
    build_rollout,
    discretize_paddle,
    extract_geometry,
    position_indices,
    velocity_indices,
)

from oracles import impulse_rollout, paddle_A, simulate

B = np.array([1.0, 0.0])

# 30-term series exp of [[-1, 0], [1, 0]], frozen from oracles.paddle_A(1.0)
A_DELTA_1 = np.array([[0.36787944117144245, 0.0], [0.6321205588285578, 1.0]])
# Bbold of the delta = 1 plant at N = 4, frozen from oracles.impulse_rollout
BBOLD_DELTA_1_N4 = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0],
    [0.36787944117144245, 1.0, 0.0],
    [0.6321205588285578, 0.0, 0.0],
    [0.13533528323661279, 0.36787944117144245, 1.0],
    [0.8646647167633875, 0.6321205588285578, 0.0],
])


class TestDiscretize:
    def test_zero_damping_is_pure_integrator(self):
        np.testing.assert_array_equal(discretize_paddle(0.0), [[1, 0], [1, 1]])

    def test_unit_damping_frozen(self):
        np.testing.assert_allclose(discretize_paddle(1.0), A_DELTA_1, atol=1e-12)
        np.testing.assert_allclose(discretize_paddle(1.0), [[0.367879, 0], [0.632121, 1]],
                                   atol=1e-5)

    def test_damping_three_decay(self):
        assert discretize_paddle(3.0)[0, 0] == pytest.approx(0.049787, abs=1e-6)

    @pytest.mark.parametrize("d", [1e-9, 1e-7, 1e-4, 0.3, 1.7, 5.0])
    def test_matches_series_oracle(self, d):
        # the 30-term series itself loses accuracy for much larger damping
        np.testing.assert_allclose(discretize_paddle(d), paddle_A(d), atol=1e-12)

    def test_continuous_across_small_damping_switch(self):
        below, above = discretize_paddle(0.99e-8), discretize_paddle(1.01e-8)
        np.testing.assert_allclose(below, above, atol=1e-7)

    @given(st.floats(0.0, 50.0))
    def test_structural_entries(self, d):
        A = discretize_paddle(d)
        assert A[0, 1] == 0.0 and A[1, 1] == 1.0

    def test_negative_damping_rejected(self):
        with pytest.raises(ValueError):
            discretize_paddle(-0.1)


class TestRollout:
    def test_single_block(self):
        A = discretize_paddle(1.0)
        roll = build_rollout(A, B, 2)
        np.testing.assert_array_equal(roll.Abold, A)
        np.testing.assert_array_equal(roll.Bbold, B[:, None])

    def test_identity_plant_blocks(self):
        roll = build_rollout(np.eye(2), B, 3)
        expected = np.array([[1, 0], [0, 0], [1, 1], [0, 0]], float)
        np.testing.assert_array_equal(roll.Bbold, expected)

    def test_frozen_unit_damping(self):
        roll = build_rollout(discretize_paddle(1.0), B, 4)
        np.testing.assert_allclose(roll.Bbold, BBOLD_DELTA_1_N4, atol=1e-14)

    def test_random_instance_n6(self):
        rng = np.random.default_rng(3)
        A, Bv = rng.normal(size=(2, 2)), rng.normal(size=2)
        x1, u = rng.normal(size=2), rng.normal(size=5)
        roll = build_rollout(A, Bv, 6)
        np.testing.assert_allclose(roll.trajectory(x1, u), simulate(A, Bv, x1, u), atol=1e-12)

    def test_equivalence_100_random(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            N = int(rng.integers(2, 9))
            A, Bv = rng.normal(size=(2, 2)) * 0.8, rng.normal(size=2)
            x1, u = rng.normal(size=2), rng.normal(size=N - 1)
            roll = build_rollout(A, Bv, N)
            assert np.abs(roll.trajectory(x1, u) - simulate(A, Bv, x1, u)).max() < 1e-12

    def test_matches_impulse_oracle(self):
        A = discretize_paddle(2.0)
        roll = build_rollout(A, B, 7)
        Abold, Bbold = impulse_rollout(A, B, 7)
        np.testing.assert_allclose(roll.Abold, Abold, atol=1e-14)
        np.testing.assert_allclose(roll.Bbold, Bbold, atol=1e-14)

    @pytest.mark.parametrize("N", [2, 5, 10])
    def test_block_lower_triangular(self, N):
        Bbold = build_rollout(np.random.default_rng(N).normal(size=(2, 2)), B, N).Bbold
        for i in range(N - 1):
            assert np.all(Bbold[2 * i:2 * i + 2, i + 1:] == 0.0)

    @pytest.mark.parametrize("N", [1, 0, -3, 2.5])
    def test_bad_horizon(self, N):
        with pytest.raises(InvalidHorizonError):
            build_rollout(np.eye(2), B, N)

    def test_indices(self):
        np.testing.assert_array_equal(position_indices(4), [1, 3, 5])
        np.testing.assert_array_equal(velocity_indices(4), [0, 2, 4])


class TestGeometry:
    def test_n2_position_row_is_zero(self):
        geom = extract_geometry(build_rollout(discretize_paddle(0.0), B, 2))
        np.testing.assert_array_equal(geom.bpN, [0.0])

    def test_n3_hand_expansion(self):
        geom = extract_geometry(build_rollout(discretize_paddle(0.0), B, 3))
        np.testing.assert_array_equal(geom.bpN, [1.0, 0.0])

    @pytest.mark.parametrize("N", [2, 4, 10])
    def test_last_entry_matches_bp(self, N):
        geom = extract_geometry(build_rollout(discretize_paddle(1.3), B, N))
        assert geom.bpN[-1] == geom.Bp[N - 2, N - 2]
        np.testing.assert_array_equal(geom.bpN, geom.Bp[-1])

    def test_terminal_velocity_row(self):
        roll = build_rollout(discretize_paddle(1.0), B, 4)
        np.testing.assert_allclose(extract_geometry(roll).bvN, BBOLD_DELTA_1_N4[-2], atol=1e-15)

    @given(st.floats(0.0, 5.0), st.integers(2, 12))
    @settings(max_examples=40, deadline=None)
    def test_gram_symmetric_psd(self, d, N):
        P = extract_geometry(build_rollout(discretize_paddle(d), B, N)).P
        assert np.abs(P - P.T).max() == 0.0
        # Gershgorin lower bounds of a PSD Gram matrix may be negative; eigenvalues are not
        assert np.linalg.eigvalsh(P).min() >= -1e-12
