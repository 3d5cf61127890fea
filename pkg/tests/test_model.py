import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from cherenkov_causality.linalg import SIGMA_MINUS, SIGMA_X, SIGMA_Z
from cherenkov_causality.model import (
    ModeSpec,
    PhysicalConfig,
    annihilation,
    build_collapse_ops,
    build_hamiltonian,
    cherenkov_threshold,
    coupling_modulation,
    free_hamiltonian,
    mode_annihilator,
    trajectory_position,
    trajectory_velocity,
)
from tests.conftest import OMEGA


class TestConfig:
    def test_defaults_depend_on_mode_count(self):
        one = PhysicalConfig()
        assert one.fock_cutoff == 5 and one.trajectory_kind == "relativistic"
        two = PhysicalConfig(n_modes=2)
        assert two.fock_cutoff == 5 and two.trajectory_kind == "nonrelativistic"
        assert PhysicalConfig(n_modes=3).fock_cutoff == 3

    def test_dims(self):
        cfg = PhysicalConfig(n_modes=2, fock_cutoff=3)
        assert cfg.dims == (2, 3, 3)
        assert cfg.dim == 18

    def test_rates(self):
        cfg = PhysicalConfig(T1=10e-6, T2=5e-6)
        assert cfg.gamma == pytest.approx(1e5)
        assert cfg.gamma_phi == pytest.approx((2e5 - 0.5e5) / 2)
        # T2 = 2 T1 is the pure-decay limit
        assert PhysicalConfig().gamma_phi == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("kw", [
        dict(T2=30e-6),
        dict(omega_q=0.0),
        dict(g_0=-1.0),
        dict(kappa=-1.0),
        dict(n_modes=0),
        dict(fock_cutoff=0),
        dict(trajectory_kind="hyperbolic"),
        dict(enforce_weak_coupling=True, g_0=0.2 * OMEGA),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            PhysicalConfig(**kw)

    def test_strong_coupling_allowed_by_default(self):
        assert PhysicalConfig(g_0=0.2 * OMEGA).g_0 == pytest.approx(0.2 * OMEGA)

    def test_mode_scaling(self):
        m = ModeSpec.from_fundamental(2, 1.0, 1.0, 1.0)
        assert (m.omega, m.k) == (3.0, 3.0)
        assert m.g == pytest.approx(np.sqrt(3))


class TestTrajectory:
    def test_nonrelativistic_parabola(self, base_config):
        t = np.array([0.0, 1e-8, 2e-7])
        assert_allclose(trajectory_position(t, base_config, "nonrelativistic"), 0.5e15 * t**2)
        assert_allclose(trajectory_velocity(t, base_config, "nonrelativistic"), 1e15 * t)

    def test_relativistic_closed_form(self, base_config):
        a, c = base_config.acceleration, base_config.c
        t = np.linspace(0, 1e-6, 11)
        expect = c**2 / a * (np.sqrt(1 + (a * t / c) ** 2) - 1)
        assert_allclose(trajectory_position(t, base_config), expect, rtol=1e-9, atol=1e-18)

    def test_relativistic_small_time_limit(self, base_config):
        t = 1e-12
        assert trajectory_position(t, base_config) == pytest.approx(0.5e15 * t**2, rel=1e-12)

    @given(st.floats(1e-10, 1e-5))
    def test_velocity_below_c_and_derivative(self, t):
        cfg = PhysicalConfig()
        v = trajectory_velocity(t, cfg)
        assert 0 < v < cfg.c
        h = t * 1e-5
        num = (trajectory_position(t + h, cfg) - trajectory_position(t - h, cfg)) / (2 * h)
        assert num == pytest.approx(v, rel=1e-6)

    def test_negative_time(self, base_config):
        with pytest.raises(ValueError):
            trajectory_position(-1.0, base_config)

    def test_coupling_modulation(self, base_config):
        mode = base_config.modes[0]
        assert coupling_modulation(0.0, mode, base_config) == pytest.approx(mode.g)
        frozen = base_config.with_(frozen_coupling=True)
        assert_allclose(coupling_modulation(np.array([1e-7, 2e-7]), mode, frozen), mode.g)


class TestThreshold:
    def test_base(self, base_config):
        v_c, t_star = cherenkov_threshold(base_config)
        assert v_c == pytest.approx(1.6e8, rel=1e-12)
        assert t_star == pytest.approx(1.6e-7, rel=1e-12)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_higher_modes(self, base_config, n):
        _, t_star = cherenkov_threshold(base_config, n)
        expect = (n + 2) / (n + 1) * base_config.omega_0 / (base_config.k_0 * base_config.acceleration)
        assert t_star == pytest.approx(expect, rel=1e-12)


def _dense_hamiltonian(cfg, t):
    """Hamiltonian from explicit numpy Kronecker products (one or two modes)."""
    d = cfg.fock_cutoff
    a = annihilation(d).toarray()
    iq, im = np.eye(2), np.eye(d)
    if cfg.n_modes == 1:
        ops = [np.kron(iq, a)]
        qub = lambda o: np.kron(o, im)  # noqa: E731
    else:
        ops = [np.kron(iq, np.kron(a, im)), np.kron(iq, np.kron(im, a))]
        qub = lambda o: np.kron(o, np.kron(im, im))  # noqa: E731
    h = 0.5 * cfg.omega_q * qub(SIGMA_Z)
    for m, an in zip(cfg.modes, ops):
        h = h + m.omega * an.conj().T @ an
        g = m.g * np.cos(m.k * trajectory_position(t, cfg))
        h = h + g * qub(SIGMA_X) @ (an + an.conj().T)
    return h


class TestOperators:
    @pytest.mark.parametrize("n_modes, cutoff", [(1, 4), (2, 3)])
    def test_hamiltonian_matches_dense_construction(self, n_modes, cutoff):
        cfg = PhysicalConfig(n_modes=n_modes, fock_cutoff=cutoff)
        t = 1.3e-7
        h = build_hamiltonian(cfg, t)
        assert h.is_hermitian()
        assert_allclose(h.to_dense(), _dense_hamiltonian(cfg, t), rtol=1e-13, atol=1e-3)

    def test_free_hamiltonian_is_diagonal(self, base_config):
        h = free_hamiltonian(base_config).to_dense()
        assert_allclose(h, np.diag(np.diag(h)))

    def test_annihilation(self):
        a = annihilation(4).toarray()
        assert_allclose(np.diag(a.conj().T @ a), [0, 1, 2, 3])

    def test_collapse_ops(self):
        cfg = PhysicalConfig(n_modes=2, fock_cutoff=2, T2=5e-6)
        ops = build_collapse_ops(cfg)
        assert len(ops) == 4
        rates = [r for _, r in ops]
        assert_allclose(rates, [cfg.kappa, cfg.kappa, cfg.gamma, cfg.gamma_phi])
        assert_allclose(ops[0][0].to_dense(), mode_annihilator(0, cfg).to_dense())
        assert_allclose(ops[2][0].to_dense(), np.kron(SIGMA_MINUS, np.eye(4)))
