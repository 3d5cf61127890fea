"""Quantum direct-cause measures for the qubit dynamical map.

Two-time pseudo-density matrices, their negativity (``f``), the
log-negativity capacity bound, temporal-steering assemblages and their
steering robustness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import constants as C
from .conic import SdpProblem, SdpSolution, Term, deterministic_strategies, lmi_slack, solve_sdp
from .dynamics import Channel, TimeGrid, reconstruct_channels
from .errors import SolverError
from .linalg import IDENTITY2, PAULI, hermitian_eig, kron, partial_trace
from .model import PhysicalConfig

log = logging.getLogger(__name__)

MAXIMALLY_MIXED = IDENTITY2 / 2


@dataclass(frozen=True)
class PseudoDensityMatrix:
    """``R = (1/4) sum_ij c_ij sigma_i (x) sigma_j``; the first factor is the earlier time."""

    correlators: np.ndarray

    def __post_init__(self):
        c = np.array(self.correlators, dtype=float)
        if c.shape != (4, 4):
            raise ValueError(f"correlator table must be 4x4, got {c.shape}")
        if abs(c[0, 0] - 1) > 1e-10:
            raise ValueError(f"c_00 must be 1, got {c[0, 0]!r}")
        c.setflags(write=False)
        object.__setattr__(self, "correlators", c)

    @property
    def matrix(self) -> np.ndarray:
        return sum(self.correlators[i, j] * kron(PAULI[i], PAULI[j]) for i in range(4) for j in range(4)) / 4

    @classmethod
    def from_matrix(cls, r) -> "PseudoDensityMatrix":
        r = np.asarray(r, dtype=complex)
        c = np.array([[np.trace(r @ kron(PAULI[i], PAULI[j])).real for j in range(4)] for i in range(4)])
        return cls(c)

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eig(self.matrix)[0]


def _require_tp(channel: Channel):
    err = channel.tp_error()
    if err > C.CHANNEL_TP_TOL:
        raise ValueError(f"channel is not trace preserving (error {err:.2e})")


def _check_rho0(rho0):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError("rho0 must be a 2x2 state")
    if not np.allclose(rho0, MAXIMALLY_MIXED, atol=1e-12):
        log.warning("rho0 differs from I/2: outside the no-signalling-in-time protocol")
    return rho0


def pdm_from_channel(channel: Channel, rho0=MAXIMALLY_MIXED) -> PseudoDensityMatrix:
    """Correlators ``c_ij = tr[sigma_j N({sigma_i, rho0}/2)]`` of Pauli measurements before and after ``N``."""
    _require_tp(channel)
    rho0 = _check_rho0(rho0)
    c = np.empty((4, 4))
    for i, si in enumerate(PAULI):
        out = channel((si @ rho0 + rho0 @ si) / 2)
        for j, sj in enumerate(PAULI):
            c[i, j] = np.trace(sj @ out).real
    return PseudoDensityMatrix(c)


def f_function(r: PseudoDensityMatrix) -> float:
    """Sum of the magnitudes of the eigenvalues below ``-1e-10``."""
    ev = r.eigenvalues()
    return float(np.abs(ev[ev < -C.NEGATIVITY_TOL]).sum())


def capacity_bound(r: PseudoDensityMatrix) -> float:
    """Logarithmic negativity ``log2 ||R||_1 = log2(1 + 2 f)``."""
    return math.log2(1 + 2 * f_function(r))


# ---------------------------------------------------------------------------
# steering


def pauli_settings() -> np.ndarray:
    """Eigenprojectors ``E[x, a]`` of sigma_x, sigma_y, sigma_z; outcome 0 is the +1 eigenvalue."""
    return np.array([[(IDENTITY2 + s * p) / 2 for s in (1, -1)] for p in PAULI[1:]])


def _check_projective(settings) -> np.ndarray:
    e = np.asarray(settings, dtype=complex)
    if e.ndim != 4 or e.shape[2:] != (2, 2):
        raise ValueError("settings must have shape (n_settings, n_outcomes, 2, 2)")
    for x in range(e.shape[0]):
        if not np.allclose(e[x].sum(axis=0), IDENTITY2, atol=1e-10):
            raise ValueError(f"setting {x} does not resolve the identity")
        for a in range(e.shape[1]):
            p = e[x, a]
            if not (np.allclose(p, p.conj().T, atol=1e-10) and np.allclose(p @ p, p, atol=1e-10)):
                raise ValueError(f"element ({x}, {a}) is not a projector; only projective settings are supported")
    return e


@dataclass(frozen=True)
class Assemblage:
    """Subnormalised conditional states ``elements[x, a] = sigma_{a|x}``."""

    elements: np.ndarray

    def __post_init__(self):
        e = np.array(self.elements, dtype=complex)
        if e.ndim != 4 or e.shape[2:] != (2, 2):
            raise ValueError("assemblage must have shape (n_settings, n_outcomes, 2, 2)")
        for x in range(e.shape[0]):
            for a in range(e.shape[1]):
                lo = np.linalg.eigvalsh((e[x, a] + e[x, a].conj().T) / 2)[0]
                if lo < -1e-9:
                    raise ValueError(f"assemblage element ({x}, {a}) is not positive (min eigenvalue {lo:.2e})")
        marg = e.sum(axis=1)
        if np.max(np.abs(marg - marg[0])) > C.ASSEMBLAGE_TOL:
            raise ValueError("assemblage violates no-signalling across settings")
        if abs(np.trace(marg[0]).real - 1) > C.ASSEMBLAGE_TOL:
            raise ValueError("assemblage probabilities do not sum to one")
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)

    @property
    def n_settings(self) -> int:
        return self.elements.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.elements.shape[1]

    @property
    def probabilities(self) -> np.ndarray:
        return np.trace(self.elements, axis1=2, axis2=3).real


def assemblage_from_channel(channel: Channel, rho0=MAXIMALLY_MIXED, settings=None) -> Assemblage:
    """``sigma_{a|x} = N(E_{a|x} rho0 E_{a|x})``."""
    e = _check_projective(pauli_settings() if settings is None else settings)
    rho0 = _check_rho0(rho0)
    return Assemblage(np.array([[channel(p @ rho0 @ p) for p in row] for row in e]))


def assemblage_from_pdm(r: PseudoDensityMatrix, settings=None) -> Assemblage:
    """``sigma_{a|x} = tr_{t0}[R (E_{a|x} (x) I)]``."""
    e = _check_projective(pauli_settings() if settings is None else settings)
    rm = r.matrix
    return Assemblage(np.array([[partial_trace(rm @ kron(p, IDENTITY2), [2, 2], [1]) for p in row] for row in e]))


def tsr_problem(assemblage: Assemblage) -> SdpProblem:
    """Steering-robustness SDP over one hidden state per deterministic strategy."""
    d = deterministic_strategies(assemblage.n_settings, assemblage.n_outcomes)
    nl = len(d)
    prob = SdpProblem([(2, True)] * nl, [IDENTITY2] * nl, offset=-1.0)
    for lam in range(nl):
        prob.add_psd(lam)
    for x in range(assemblage.n_settings):
        for a in range(assemblage.n_outcomes):
            el = assemblage.elements[x, a]
            prob.add_lmi([Term(lam) for lam in range(nl) if d[lam, x, a]], -(el + el.conj().T) / 2)
    return prob


def tsr_solution(assemblage: Assemblage) -> tuple[SdpProblem, SdpSolution]:
    prob = tsr_problem(assemblage)
    sol = solve_sdp(prob)
    if sol.status != "optimal":
        raise SolverError(f"steering-robustness SDP ended with status {sol.status!r} (gap {sol.gap:.2e})")
    return prob, sol


def tsr(assemblage: Assemblage) -> float:
    """Temporal steering robustness, ``max(min sum_l tr s_l - 1, 0)``."""
    _, sol = tsr_solution(assemblage)
    return max(sol.primal_value, 0.0)


def min_slack_eigenvalue(problem: SdpProblem, sol: SdpSolution) -> float:
    return min(float(np.linalg.eigvalsh(s)[0]) for s in lmi_slack(problem, sol.blocks))


@dataclass(frozen=True)
class CausalityScan:
    times: np.ndarray
    f: np.ndarray
    tsr: np.ndarray
    capacity_bound: np.ndarray
    channels: tuple[Channel, ...] = ()

    def rows(self):
        return zip(self.times, self.f, self.tsr, self.capacity_bound)


def measures(channel: Channel, rho0=MAXIMALLY_MIXED) -> tuple[float, float, float]:
    r = pdm_from_channel(channel, rho0)
    return f_function(r), tsr(assemblage_from_channel(channel, rho0)), capacity_bound(r)


def causality_scan(config: PhysicalConfig, grid: TimeGrid | Sequence[float], rho0=MAXIMALLY_MIXED,
                   **kwargs) -> CausalityScan:
    """f, TSR and capacity bound of the map from t=0 to every grid time."""
    times = grid.times if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    channels = reconstruct_channels(config, times, **kwargs)
    vals = np.array([measures(ch, rho0) for ch in channels]).reshape(-1, 3)
    return CausalityScan(times, vals[:, 0], vals[:, 1], vals[:, 2], tuple(channels))
