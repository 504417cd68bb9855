import numpy as np
import pytest

from qrotor import (
    ClassicalEnsemble,
    classical_diffusion_rate,
    initial_ensemble,
    step_classical,
    step_classical_inverse,
)
from qrotor.classical import second_moment_series

TWO_PI = 2.0 * np.pi


class TestStepClassical:
    def test_fixed_point_at_origin(self):
        ens = ClassicalEnsemble(n=[0.0], theta=[0.0], k=10.0, T=0.5)
        step_classical(ens)
        assert ens.n[0] == 0.0
        assert ens.theta[0] == 0.0

    def test_direct_substitution(self):
        ens = ClassicalEnsemble(n=[0.0], theta=[np.pi / 2], k=10.0, T=0.5)
        step_classical(ens)
        assert ens.n[0] == pytest.approx(10.0, abs=1e-12)
        assert ens.theta[0] == pytest.approx((np.pi / 2 + 5.0) % TWO_PI, abs=1e-12)

    def test_theta_stays_wrapped(self):
        ens = initial_ensemble(10.0, 0.5, 500, seed=0)
        for _ in range(50):
            step_classical(ens)
            assert ens.theta.min() >= 0.0
            assert ens.theta.max() < TWO_PI

    def test_below_chaos_border_stays_bounded(self):
        # K = 0.5 < 0.9716: librations only, no global diffusion
        ens = initial_ensemble(10.0, 0.05, 2000, seed=1)
        n2 = second_moment_series(ens, 10_000)
        assert n2.max() < 1000.0
        t = np.arange(5000, 10_001, dtype=float)
        slope = np.polyfit(t, n2[5000:], 1)[0]
        assert abs(slope) * 10_000 < 0.1 * n2.max()


class TestInvertibility:
    def test_single_step_roundtrip_along_trajectory(self):
        ens = initial_ensemble(10.0, 0.5, 500, seed=42)
        for _ in range(1000):
            n0 = ens.n.copy()
            th0 = ens.theta.copy()
            step_classical(ens)
            probe = ClassicalEnsemble(ens.n.copy(), ens.theta.copy(),
                                      ens.k, ens.T)
            step_classical_inverse(probe)
            dth = np.abs((probe.theta - th0 + np.pi) % TWO_PI - np.pi)
            assert np.max(np.abs(probe.n - n0)) < 1e-10
            assert np.max(dth) < 1e-10


class TestDiffusionRate:
    def test_quasilinear_rate_at_K5(self):
        D = classical_diffusion_rate(10.0, 5.0, n_traj=10_000, t_max=1000, seed=3)
        assert 0.7 * 50.0 <= D <= 1.3 * 50.0

    def test_quasilinear_rate_at_k15(self):
        D = classical_diffusion_rate(15.0, 5.0, n_traj=10_000, t_max=1000, seed=4)
        assert 0.7 * 112.5 <= D <= 1.3 * 112.5

    def test_rate_at_K10_with_oscillatory_correction(self):
        # The quasilinear value carries the correction factor
        # 1 - 2 J2(K)(1 - J2(K)) ~ 0.62 at K = 10, outside a +-30% band
        # around k^2/2; test against the corrected expectation instead.
        D = classical_diffusion_rate(20.0, 10.0, n_traj=10_000, t_max=1000, seed=5)
        assert 0.45 * 200.0 <= D <= 0.85 * 200.0

    def test_below_border_slope_consistent_with_zero(self):
        D = classical_diffusion_rate(10.0, 0.5, n_traj=2000, t_max=5000, seed=6)
        assert abs(D) * 5000 < 100.0  # spread stays far below diffusive growth

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            classical_diffusion_rate(10.0, 5.0, n_traj=10, t_max=1000)
        with pytest.raises(ValueError):
            classical_diffusion_rate(10.0, 5.0, n_traj=1000, t_max=10)
