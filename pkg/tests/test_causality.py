import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cherenkov_causality.causality import (
    MAXIMALLY_MIXED,
    Assemblage,
    PseudoDensityMatrix,
    assemblage_from_channel,
    assemblage_from_pdm,
    capacity_bound,
    causality_scan,
    f_function,
    measures,
    min_slack_eigenvalue,
    pauli_settings,
    pdm_from_channel,
    tsr,
    tsr_problem,
    tsr_solution,
)
from cherenkov_causality.conic import deterministic_strategies, lmi_slack, objective_value
from cherenkov_causality.dynamics import Channel, TimeGrid
from cherenkov_causality.linalg import IDENTITY2, PAULI, SIGMA_X, SIGMA_Z, kron
from cherenkov_causality.model import PhysicalConfig
from tests.conftest import random_kraus

TSR_IDENTITY = 2 - math.sqrt(3)


def amplitude_damping(gamma):
    k0 = np.array([[math.sqrt(1 - gamma), 0], [0, 1]])  # basis (|E>, |G>)
    k1 = np.array([[0, 0], [math.sqrt(gamma), 0]])
    return Channel.from_kraus([k0, k1])


def dephasing(p):
    return Channel.from_kraus([math.sqrt(1 - p) * IDENTITY2, math.sqrt(p) * SIGMA_Z])


def cvxpy_tsr(assemblage):
    """Same steering-robustness program, solved by an external conic solver."""
    d = deterministic_strategies(assemblage.n_settings, assemblage.n_outcomes)
    sig = [cp.Variable((2, 2), hermitian=True) for _ in d]
    cons = [s >> 0 for s in sig]
    for x in range(assemblage.n_settings):
        for a in range(assemblage.n_outcomes):
            lhs = sum(sig[lam] for lam in range(len(d)) if d[lam, x, a])
            cons.append(lhs - assemblage.elements[x, a] >> 0)
    prob = cp.Problem(cp.Minimize(cp.real(sum(cp.trace(s) for s in sig))), cons)
    return prob.solve(solver=cp.CLARABEL) - 1


class TestPseudoDensityMatrix:
    def test_identity_channel_is_swap_over_two(self):
        r = pdm_from_channel(Channel.identity())
        swap = sum(kron(p, p) for p in PAULI) / 2
        assert_allclose(r.matrix, swap / 2, atol=1e-15)
        assert_allclose(r.eigenvalues(), [-0.5, 0.5, 0.5, 0.5], atol=1e-15)

    def test_identity_f_and_capacity(self):
        r = pdm_from_channel(Channel.identity())
        assert f_function(r) == pytest.approx(0.5, abs=1e-12)
        assert capacity_bound(r) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("ch", [Channel.depolarizing(1.0), Channel.replacement(np.diag([0.0, 1.0])),
                                    dephasing(0.5)])
    def test_entanglement_breaking_channels_have_no_negativity(self, ch):
        r = pdm_from_channel(ch)
        assert f_function(r) == 0.0
        assert capacity_bound(r) == 0.0

    def test_amplitude_damping_negativity(self):
        # matrix and correlator routes agree; negativity shrinks with damping
        prev = 0.5 + 1e-12
        for gamma in (0.0, 0.3, 0.9):
            r = pdm_from_channel(amplitude_damping(gamma))
            direct = PseudoDensityMatrix.from_matrix(r.matrix)
            assert_allclose(direct.correlators, r.correlators, atol=1e-14)
            assert 0 <= f_function(r) <= prev
            prev = f_function(r)

    def test_correlator_table(self):
        c = pdm_from_channel(Channel.identity()).correlators
        assert_allclose(c, np.eye(4), atol=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            PseudoDensityMatrix(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            PseudoDensityMatrix(np.eye(3))

    def test_rejects_non_tp(self):
        bad = Channel(np.diag([1.0, 1.0, 1.0, 0.5]))
        with pytest.raises(ValueError, match="trace preserving"):
            pdm_from_channel(bad)

    def test_warns_for_non_uniform_input(self, caplog):
        pdm_from_channel(Channel.identity(), np.diag([1.0, 0.0]))
        assert "I/2" in caplog.text

    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_unit_trace_and_capacity_relation(self, seed, n_kraus):
        ch = Channel.from_kraus(random_kraus(np.random.default_rng(seed), n_kraus))
        r = pdm_from_channel(ch)
        assert np.trace(r.matrix).real == pytest.approx(1.0)
        ev = r.eigenvalues()
        assert capacity_bound(r) == pytest.approx(math.log2(np.abs(ev).sum()), abs=1e-9)
        assert 0 <= f_function(r) <= 0.5 + 1e-12


class TestAssemblage:
    def test_pauli_settings_are_projective(self):
        e = pauli_settings()
        assert e.shape == (3, 2, 2, 2)
        assert_allclose(e[0, 0], (IDENTITY2 + SIGMA_X) / 2)

    @given(st.integers(0, 2**32 - 1))
    def test_channel_and_pdm_routes_agree(self, seed):
        ch = Channel.from_kraus(random_kraus(np.random.default_rng(seed), 3))
        a = assemblage_from_channel(ch)
        b = assemblage_from_pdm(pdm_from_channel(ch))
        assert_allclose(a.elements, b.elements, atol=1e-14)

    def test_probabilities(self):
        a = assemblage_from_channel(Channel.identity())
        assert_allclose(a.probabilities, 0.5)

    def test_rejects_signalling(self):
        e = assemblage_from_channel(Channel.identity()).elements.copy()
        e[0, 0], e[0, 1] = np.diag([0.5, 0]), np.diag([0.5, 0])
        with pytest.raises(ValueError, match="no-signalling"):
            Assemblage(e)

    def test_rejects_negative_element(self):
        e = assemblage_from_channel(Channel.identity()).elements.copy()
        e[0, 0] = np.diag([0.6, -0.1])
        e[0, 1] = IDENTITY2 / 2 - e[0, 0]
        with pytest.raises(ValueError, match="positive"):
            Assemblage(e)

    def test_rejects_non_projective_settings(self):
        povm = np.array([[np.diag([0.7, 0.2]), np.diag([0.3, 0.8])]])
        with pytest.raises(ValueError, match="projector"):
            assemblage_from_channel(Channel.identity(), settings=povm)


class TestSteeringRobustness:
    def test_identity_channel(self):
        a = assemblage_from_channel(Channel.identity())
        prob, sol = tsr_solution(a)
        assert sol.primal_value == pytest.approx(TSR_IDENTITY, abs=1e-8)
        assert abs(sol.gap) < 1e-7
        assert min_slack_eigenvalue(prob, sol) > -1e-9

    def test_identity_explicit_primal_point(self):
        # hidden states at the cube corners (+-1, +-1, +-1)/sqrt(3), equal weights
        d = deterministic_strategies(3, 2)
        w = math.sqrt(3) / (8 * (math.sqrt(3) + 1))
        blocks = []
        for row in d:
            r = np.array([1 if row[x, 0] else -1 for x in range(3)]) / math.sqrt(3)
            blocks.append(w * (IDENTITY2 + r[0] * PAULI[1] + r[1] * PAULI[2] + r[2] * PAULI[3]))
        prob = tsr_problem(assemblage_from_channel(Channel.identity()))
        assert min(np.linalg.eigvalsh(s)[0] for s in lmi_slack(prob, blocks)) > -1e-12
        assert objective_value(prob, blocks) == pytest.approx(TSR_IDENTITY, abs=1e-12)

    def test_identity_dual_certificate(self):
        # F_{a|x} = alpha Pi_{a|x} with alpha = 2/(3 + sqrt 3) is dual feasible and attains 2 - sqrt 3
        e = pauli_settings()
        d = deterministic_strategies(3, 2)
        alpha = 2 / (3 + math.sqrt(3))
        for row in d:
            m = IDENTITY2 - alpha * sum(e[x, a] for x in range(3) for a in range(2) if row[x, a])
            assert np.linalg.eigvalsh(m)[0] > -1e-12
        sigma = assemblage_from_channel(Channel.identity()).elements
        bound = sum(alpha * np.trace(e[x, a] @ sigma[x, a]).real for x in range(3) for a in range(2)) - 1
        assert bound == pytest.approx(TSR_IDENTITY, abs=1e-12)

    def test_identity_against_cvxpy(self):
        a = assemblage_from_channel(Channel.identity())
        assert tsr(a) == pytest.approx(cvxpy_tsr(a), abs=1e-6)

    @pytest.mark.parametrize("ch", [Channel.depolarizing(1.0), Channel.replacement(np.diag([0.0, 1.0])),
                                    dephasing(0.5)])
    def test_unsteerable_channels(self, ch):
        assert tsr(assemblage_from_channel(ch)) == pytest.approx(0.0, abs=1e-6)

    @settings(max_examples=10)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3))
    def test_random_channels_against_cvxpy(self, seed, n_kraus):
        a = assemblage_from_channel(Channel.from_kraus(random_kraus(np.random.default_rng(seed), n_kraus)))
        assert tsr(a) == pytest.approx(max(cvxpy_tsr(a), 0.0), abs=1e-6)

    @settings(max_examples=15)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_hierarchy(self, seed, n_kraus):
        # steerable in time implies a negative pseudo-density matrix
        ch = Channel.from_kraus(random_kraus(np.random.default_rng(seed), n_kraus))
        f, t, _ = measures(ch)
        if t > 1e-6:
            assert f > 1e-10

    def test_dephasing_is_monotone(self):
        vals = [tsr(assemblage_from_channel(dephasing(p))) for p in (0.0, 0.1, 0.2, 0.3)]
        assert vals[0] == pytest.approx(TSR_IDENTITY, abs=1e-7)
        assert all(a >= b - 1e-8 for a, b in zip(vals, vals[1:]))


class TestScan:
    def test_short_scan(self):
        cfg = PhysicalConfig(fock_cutoff=3)
        scan = causality_scan(cfg, TimeGrid(0, 1e-7, 2))
        rows = list(scan.rows())
        assert len(rows) == 3
        t0, f0, s0, c0 = rows[0]
        assert (t0, f0, c0) == (0.0, pytest.approx(0.5, abs=1e-9), pytest.approx(1.0, abs=1e-9))
        assert s0 == pytest.approx(TSR_IDENTITY, abs=1e-6)
        assert np.all(scan.f >= 0) and np.all(scan.tsr >= 0)
        assert len(scan.channels) == 3

    def test_default_rho0(self):
        assert_allclose(MAXIMALLY_MIXED, IDENTITY2 / 2)
