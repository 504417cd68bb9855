import numpy as np
import pytest

from qrotor import (
    Representation,
    RotatorParams,
    StateError,
    StateVector,
    TransformDirection,
    apply_kick_phase,
    apply_rotation_phase,
    exact_transform,
    init_delta_state,
    signed_levels,
    step_exact,
)
from qrotor.rotor import _kick_table, _rotation_table

from conftest import brute_force_dft_matrix, dense_one_kick_operator, random_momentum_state


def params(n_q=8, k=10.0, K=5.0):
    return RotatorParams.from_chaos_parameter(k, K, n_q)


class TestRotatorParams:
    def test_period_times_k_is_K_exactly(self):
        for k, K in [(10.0, 5.0), (15.0, 5.0), (20.0, 10.0), (10.0, 0.5)]:
            p = RotatorParams.from_chaos_parameter(k, K, 8)
            assert p.T * p.k == p.K

    def test_derived_quantities(self):
        p = RotatorParams(k=10.0, T=0.5, n_q=12)
        assert p.K == 5.0
        assert p.N == 4096

    def test_free_rotor_allowed(self):
        p = RotatorParams(k=0.0, T=0.7, n_q=6)
        assert p.K == 0.0

    @pytest.mark.parametrize("n_q", [1, 0, 25, 30])
    def test_qubit_count_bounds(self, n_q):
        with pytest.raises(ValueError):
            RotatorParams(k=10.0, T=0.5, n_q=n_q)

    def test_negative_parameters_rejected(self):
        with pytest.raises(ValueError):
            RotatorParams(k=-1.0, T=0.5, n_q=8)
        with pytest.raises(ValueError):
            RotatorParams.from_chaos_parameter(0.0, 5.0, 8)

    def test_chaos_regime_flag(self):
        assert params(k=10.0, K=5.0).in_quantum_chaos_regime()
        assert not params(k=5.0, K=10.0).in_quantum_chaos_regime()
        assert not params(k=10.0, K=0.5).in_quantum_chaos_regime()


class TestSignedLevels:
    def test_index_mapping(self):
        assert signed_levels(2).tolist() == [0, 1, -2, -1]

    def test_range(self):
        lev = signed_levels(6)
        assert lev.min() == -32 and lev.max() == 31
        assert len(np.unique(lev)) == 64


class TestDeltaState:
    def test_delta_at_origin(self):
        s = init_delta_state(params(n_q=2), 0)
        assert np.array_equal(s.amplitudes, [1, 0, 0, 0])
        assert s.representation is Representation.MOMENTUM

    def test_negative_level_maps_to_upper_half(self):
        s = init_delta_state(params(n_q=2), -2)
        assert np.array_equal(s.amplitudes, [0, 0, 1, 0])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            init_delta_state(params(n_q=2), 2)
        with pytest.raises(ValueError):
            init_delta_state(params(n_q=2), -3)


class TestDiagonalPhases:
    def test_rotation_multipliers(self):
        p = RotatorParams(k=10.0, T=0.5, n_q=4)
        tab = _rotation_table(p.n_q, p.T)
        lev = signed_levels(4)
        assert tab[0] == 1.0  # n = 0
        i_plus2 = np.where(lev == 2)[0][0]
        assert tab[i_plus2] == pytest.approx(np.exp(-1j * 1.0), abs=1e-14)

    def test_rotation_parity(self):
        tab = _rotation_table(6, 0.37)
        lev = signed_levels(6)
        for n in range(1, 32):
            ip = np.where(lev == n)[0][0]
            im = np.where(lev == -n)[0][0]
            assert tab[ip] == tab[im]

    def test_kick_multipliers(self):
        p = RotatorParams(k=10.0, T=0.5, n_q=4)
        tab = _kick_table(p.n_q, p.k)
        N = p.N
        assert tab[N // 4] == pytest.approx(1.0, abs=1e-14)        # theta = pi/2
        assert tab[0] == pytest.approx(np.exp(-10j), abs=1e-14)    # theta = 0
        assert tab[N // 2] == pytest.approx(np.exp(+10j), abs=1e-14)  # theta = pi

    def test_representation_guards(self):
        p = params()
        s = init_delta_state(p, 0)
        exact_transform(s, TransformDirection.TO_ANGLE)
        with pytest.raises(StateError):
            apply_rotation_phase(s, p)
        exact_transform(s, TransformDirection.TO_MOMENTUM)
        with pytest.raises(StateError):
            apply_kick_phase(s, p)

    def test_norm_preserved(self):
        p = params()
        s = random_momentum_state(8, 1)
        apply_rotation_phase(s, p)
        assert s.norm_error() < 1e-13


class TestExactTransform:
    def test_delta_to_uniform(self):
        p = params(n_q=6)
        s = init_delta_state(p, 0)
        exact_transform(s, TransformDirection.TO_ANGLE)
        assert np.allclose(s.amplitudes, 1.0 / 8.0, atol=1e-14)
        assert s.representation is Representation.ANGLE

    def test_round_trip_identity(self):
        s = random_momentum_state(8, 7)
        ref = s.amplitudes.copy()
        exact_transform(s, TransformDirection.TO_ANGLE)
        exact_transform(s, TransformDirection.TO_MOMENTUM)
        assert np.max(np.abs(s.amplitudes - ref)) < 1e-12

    @pytest.mark.parametrize("n_q", [2, 3, 4, 5, 6])
    def test_matches_brute_force_summation(self, n_q):
        F = brute_force_dft_matrix(n_q, +1)
        for seed in range(5):
            s = random_momentum_state(n_q, seed)
            expected = F @ s.amplitudes
            exact_transform(s, TransformDirection.TO_ANGLE)
            assert np.max(np.abs(s.amplitudes - expected)) < 1e-12

    def test_direction_guard(self):
        s = random_momentum_state(4, 3)
        with pytest.raises(StateError):
            exact_transform(s, TransformDirection.TO_MOMENTUM)


class TestStepExact:
    def test_free_rotor_limit_preserves_distribution(self):
        # k = 0 switches the kick multiplier to exactly 1: only the diagonal
        # rotation acts and every |psi_n| is conserved.
        p = RotatorParams(k=0.0, T=0.61, n_q=8)
        s = random_momentum_state(8, 11)
        W0 = np.abs(s.amplitudes) ** 2
        for _ in range(50):
            step_exact(s, p)
        assert np.max(np.abs(np.abs(s.amplitudes) ** 2 - W0)) < 1e-12

    @pytest.mark.parametrize("n_q", [2, 3, 4, 5, 6])
    def test_matches_dense_unitary_oracle(self, n_q):
        p = params(n_q=n_q)
        U = dense_one_kick_operator(p)
        s = random_momentum_state(n_q, 100 + n_q)
        expected = U @ s.amplitudes
        step_exact(s, p)
        assert np.max(np.abs(s.amplitudes - expected)) < 1e-12

    def test_norm_after_many_kicks(self):
        p = params(n_q=8)
        s = init_delta_state(p, 0)
        for _ in range(10_000):
            step_exact(s, p)
        assert s.norm_error() < 1e-10


class TestStateVector:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            StateVector(np.zeros(5, dtype=complex), Representation.MOMENTUM, 2)

    def test_copy_is_independent(self):
        s = random_momentum_state(4, 2)
        c = s.copy()
        c.amplitudes[:] = 0
        assert s.norm_error() < 1e-12
