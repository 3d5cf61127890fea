import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cherenkov_causality.errors import QuadratureError
from cherenkov_causality.model import PhysicalConfig
from cherenkov_causality.perturbation import (
    PerturbationParams,
    chirp_amplitude,
    onset_time,
    transition_probability_closed_form,
    transition_probability_quadrature,
)

UNIT = PerturbationParams(g=1.0, omega_sum=1.0, k=1.0, acceleration=1.0)


def _mp_probability(t, p):
    mpmath.mp.dps = 30
    f = lambda tau: mpmath.exp(1j * p.omega_sum * tau) * mpmath.cos(p.k * p.acceleration * tau**2 / 2)  # noqa: E731
    pts = np.linspace(0, t, 9).tolist()
    return float(abs(p.g * mpmath.quad(f, pts)) ** 2)


class TestParams:
    def test_from_config(self):
        cfg = PhysicalConfig(n_modes=2)
        p = PerturbationParams.from_config(cfg, 1)
        assert p.omega_sum == pytest.approx(3 * cfg.omega_0)
        assert p.k == pytest.approx(2 * cfg.k_0)
        assert p.g == pytest.approx(math.sqrt(2) * cfg.g_0)
        with pytest.raises(ValueError):
            PerturbationParams.from_config(cfg, 2)

    def test_threshold_time(self):
        p = PerturbationParams.from_config(PhysicalConfig())
        assert p.threshold_time == pytest.approx(1.6e-7)
        assert p.chirp_rate == pytest.approx(PhysicalConfig().k_0 * 1e15)

    @pytest.mark.parametrize("kw", [dict(g=-1.0), dict(omega_sum=0.0), dict(k=-1.0), dict(acceleration=0.0)])
    def test_rejects(self, kw):
        args = dict(g=1.0, omega_sum=1.0, k=1.0, acceleration=1.0)
        args.update(kw)
        with pytest.raises(ValueError):
            PerturbationParams(**args)


class TestClosedForm:
    @pytest.mark.parametrize("t", [0.3, 1.0, 2.5, 6.0])
    def test_against_mpmath_quadrature(self, t):
        assert transition_probability_closed_form(t, UNIT) == pytest.approx(_mp_probability(t, UNIT), rel=1e-11)

    def test_past_stationary_point(self):
        p = PerturbationParams(g=0.3, omega_sum=4.0, k=2.0, acceleration=1.5)
        t = 3.0  # stationary phase at w/(kA) = 1.33
        assert transition_probability_closed_form(t, p) == pytest.approx(_mp_probability(t, p), rel=1e-10)

    def test_zero_and_small_time(self):
        assert transition_probability_closed_form(0.0, UNIT) == 0.0
        # |amplitude| ~ g t before any oscillation sets in
        t = 1e-4
        assert transition_probability_closed_form(t, UNIT) == pytest.approx(t**2, rel=1e-6)

    def test_scales_with_g_squared(self):
        p2 = PerturbationParams(g=2.0, omega_sum=1.0, k=1.0, acceleration=1.0)
        t = np.array([0.5, 2.0])
        assert_allclose(transition_probability_closed_form(t, p2), 4 * transition_probability_closed_form(t, UNIT))

    def test_array_shape(self):
        out = transition_probability_closed_form(np.zeros((2, 3)), UNIT)
        assert out.shape == (2, 3)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            transition_probability_closed_form(-1.0, UNIT)


class TestQuadrature:
    @settings(max_examples=25)
    @given(st.floats(0.5, 20), st.floats(0.2, 5), st.floats(0.05, 30))
    def test_matches_closed_form(self, w, ka, t):
        p = PerturbationParams(g=1.0, omega_sum=w, k=ka, acceleration=1.0)
        qf = transition_probability_quadrature(t, p)
        cf = transition_probability_closed_form(t, p)
        assert qf == pytest.approx(cf, rel=1e-8, abs=1e-13)

    def test_error_estimate(self):
        amp, err = chirp_amplitude(np.array([1.0, 4.0]), UNIT, tol=1e-12)
        assert np.all(err <= 1e-12)
        assert abs(amp[1]) ** 2 == pytest.approx(_mp_probability(4.0, UNIT), rel=1e-10)

    def test_zero_coupling(self):
        p = PerturbationParams(g=0.0, omega_sum=1.0, k=1.0, acceleration=1.0)
        amp, err = chirp_amplitude([1.0, 2.0], p)
        assert_allclose(amp, 0.0)

    def test_failure_raises(self):
        with pytest.raises(QuadratureError) as info:
            chirp_amplitude(50.0, UNIT, tol=1e-30, max_rounds=1)
        assert info.value.error_estimate > 0


class TestOnset:
    def test_logistic(self):
        f = lambda t: 1 / (1 + np.exp(-(t - 0.3) / 0.01))  # noqa: E731
        assert onset_time(f, (0.0, 1.0)) == pytest.approx(0.3, abs=1e-3)

    def test_sampled_array(self):
        t = np.linspace(0, 1, 1001)
        assert onset_time(np.tanh((t - 0.6) / 0.05), (0.0, 1.0)) == pytest.approx(0.6, abs=1e-3)

    def test_flat_returns_none(self):
        assert onset_time(np.ones(10), (0.0, 1.0)) is None

    def test_too_short(self):
        with pytest.raises(ValueError):
            onset_time(np.ones(2), (0.0, 1.0))

    def test_base_onset_near_threshold(self):
        p = PerturbationParams.from_config(PhysicalConfig())
        t = onset_time(lambda x: transition_probability_closed_form(x, p), (0.0, 4e-7))
        assert t == pytest.approx(p.threshold_time, rel=0.15)
