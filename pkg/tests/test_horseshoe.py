import numpy as np
import pytest

from semibn import HsScaleMap, hs_log_prior, hs_log_prior_grad


class TestHsScaleMap:
    def test_uniform(self):
        scales = HsScaleMap.uniform(5.0)
        assert scales.tau_expert == scales.tau_nonexpert == 5.0

    def test_scale_vector_by_edge_type(self):
        scales = HsScaleMap(tau_expert=5.0, tau_nonexpert=0.001)
        assert np.allclose(scales.scale_vector([True, False, True]),
                           [5.0, 0.001, 5.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            HsScaleMap(tau_expert=0.0, tau_nonexpert=1.0)
        with pytest.raises(ValueError):
            HsScaleMap(tau_expert=1.0, tau_nonexpert=-2.0)


class TestLogPrior:
    def test_frozen_values(self):
        assert abs(hs_log_prior([1.0], [1.0]) - (-1.958659)) < 1e-6
        assert abs(hs_log_prior([10.0], [1.0]) - (-3.236449)) < 1e-6
        assert abs(hs_log_prior([1.0, 1.0], [1.0, 1.0]) - (-3.917318)) < 1e-6

    def test_closed_form(self):
        # independent re-derivation of the density term by term
        rng = np.random.default_rng(0)
        for _ in range(25):
            p = int(rng.integers(1, 5))
            amp = rng.uniform(0.01, 8.0, size=p)
            tau = rng.uniform(0.01, 8.0, size=p)
            expected = (np.log(tau / np.sqrt(amp**2 + tau**2)).sum()
                        - np.log1p(tau**2 / amp**2).sum()
                        - 0.5 * p * np.log(2.0 * np.pi))
            assert abs(hs_log_prior(amp, tau) - expected) < 1e-10

    def test_empty_is_zero(self):
        assert hs_log_prior([], []) == 0.0

    def test_zero_amplitude_is_minus_inf(self):
        assert hs_log_prior([0.0], [1.0]) == -np.inf
        assert hs_log_prior([1.0, 0.0], [1.0, 1.0]) == -np.inf

    def test_separable_across_entries(self):
        amp = np.array([0.3, 1.7, 4.2])
        tau = np.array([5.0, 0.001, 1.0])
        singles = sum(hs_log_prior([a], [t]) for a, t in zip(amp, tau))
        assert abs(hs_log_prior(amp, tau) - singles) < 1e-12

    def test_decreasing_tau_shrinks(self):
        # for fixed amplitude s the density peaks at tau = s / sqrt(2);
        # below the peak the log prior falls strictly as tau drops
        peak = 1.0 / np.sqrt(2.0)
        values = [hs_log_prior([1.0], [t]) for t in (peak, 0.5, 0.1, 0.01, 0.001)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert hs_log_prior([1.0], [peak]) > hs_log_prior([1.0], [0.9])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hs_log_prior([1.0, 2.0], [1.0])


class TestLogPriorGrad:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            p = int(rng.integers(1, 5))
            amp = rng.uniform(0.05, 6.0, size=p)
            tau = rng.uniform(0.05, 6.0, size=p)
            grad = hs_log_prior_grad(amp, tau)
            for j in range(p):
                eps = 1e-6 * amp[j]
                plus, minus = amp.copy(), amp.copy()
                plus[j] += eps
                minus[j] -= eps
                fd = (hs_log_prior(plus, tau) - hs_log_prior(minus, tau)) / (2 * eps)
                assert np.isclose(grad[j], fd, rtol=1e-5, atol=1e-8)

    def test_independent_entries(self):
        grad = hs_log_prior_grad([0.5, 3.0], [5.0, 5.0])
        alone = hs_log_prior_grad([0.5], [5.0])
        assert np.isclose(grad[0], alone[0])

    def test_sign_structure(self):
        # below the prior's interior mode at sqrt(2) tau the pull is upward,
        # above it downward; tiny tau shrinks any sizeable amplitude
        tau = 5.0
        assert hs_log_prior_grad([0.2], [tau])[0] > 0.0
        assert hs_log_prior_grad([20.0], [tau])[0] < 0.0
        assert np.isclose(hs_log_prior_grad([np.sqrt(2.0) * tau], [tau])[0], 0.0,
                          atol=1e-12)
        assert hs_log_prior_grad([0.2], [0.001])[0] < 0.0

    def test_zero_amplitude_rejected(self):
        with pytest.raises(ValueError):
            hs_log_prior_grad([0.0], [1.0])
