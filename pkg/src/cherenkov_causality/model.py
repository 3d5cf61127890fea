"""Physical configuration of the accelerating qubit and its cavity modes.

Operators live on ``qubit (x) mode_0 (x) mode_1 (x) ...``; partial traces
elsewhere rely on that ordering.  The qubit basis is ``(|E>, |G>)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
import scipy.sparse as sp

from . import constants as C
from .linalg import SIGMA_MINUS, SIGMA_X, SIGMA_Z, SparseOperator, kron

TrajectoryKind = Literal["relativistic", "nonrelativistic"]


@dataclass(frozen=True)
class ModeSpec:
    """Cavity mode ``n`` with frequency, coupling and wave number scaled from the fundamental."""

    index: int
    omega: float
    g: float
    k: float

    @classmethod
    def from_fundamental(cls, n: int, omega_0: float, g_0: float, k_0: float) -> "ModeSpec":
        return cls(n, (n + 1) * omega_0, np.sqrt(n + 1) * g_0, (n + 1) * k_0)


@dataclass(frozen=True)
class PhysicalConfig:
    """Qubit, cavity and dissipation parameters in SI units (angular frequencies in rad/s).

    ``fock_cutoff`` and ``trajectory_kind`` default to values that depend on
    ``n_modes``: cutoff 5 (3 for three or more modes); relativistic
    trajectory for one mode, the non-relativistic parabola otherwise.
    ``frozen_coupling`` replaces the position-dependent modulation by the
    constant ``g_n`` and exists for testing against exact propagators.
    """

    omega_q: float = C.OMEGA_BASE
    omega_0: float = C.OMEGA_BASE
    k_0: float = C.K_BASE
    g_0: float = 0.01 * C.OMEGA_BASE
    acceleration: float = C.ACCELERATION_BASE
    c: float = C.SPEED_OF_LIGHT
    n_modes: int = 1
    fock_cutoff: int | None = None
    T1: float = C.T1_BASE
    T2: float = C.T2_BASE
    kappa: float = C.KAPPA_BASE
    trajectory_kind: TrajectoryKind | None = None
    enforce_weak_coupling: bool = False
    frozen_coupling: bool = False

    def __post_init__(self):
        if self.fock_cutoff is None:
            object.__setattr__(self, "fock_cutoff", 3 if self.n_modes >= 3 else 5)
        if self.trajectory_kind is None:
            kind = "relativistic" if self.n_modes == 1 else "nonrelativistic"
            object.__setattr__(self, "trajectory_kind", kind)
        for name in ("omega_q", "omega_0", "k_0", "acceleration", "c", "T1", "T2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.g_0 < 0:
            raise ValueError(f"g_0 must be non-negative, got {self.g_0!r}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa!r}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be an integer >= 1, got {self.n_modes!r}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be an integer >= 1, got {self.fock_cutoff!r}")
        if self.trajectory_kind not in ("relativistic", "nonrelativistic"):
            raise ValueError(f"unknown trajectory kind {self.trajectory_kind!r}")
        if self.T2 > 2 * self.T1:
            raise ValueError(f"T2={self.T2} exceeds 2*T1={2 * self.T1}: dephasing rate would be negative")
        if self.enforce_weak_coupling and not self.g_0 < 0.1 * self.omega_0:
            raise ValueError("g_0 must stay below 0.1*omega_0 (ultrastrong coupling) when enforce_weak_coupling is set")

    def with_(self, **changes) -> "PhysicalConfig":
        return replace(self, **changes)

    @property
    def modes(self) -> list[ModeSpec]:
        return [ModeSpec.from_fundamental(n, self.omega_0, self.g_0, self.k_0) for n in range(self.n_modes)]

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) + (self.fock_cutoff,) * self.n_modes

    @property
    def dim(self) -> int:
        return 2 * self.fock_cutoff**self.n_modes

    @property
    def gamma(self) -> float:
        return 1.0 / self.T1

    @property
    def gamma_phi(self) -> float:
        return (1.0 / self.T2 - 1.0 / (2.0 * self.T1)) / 2.0


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    return t


def trajectory_position(t, config: PhysicalConfig, kind: TrajectoryKind | None = None):
    """Qubit position x_q(t) in metres; accepts scalars or arrays."""
    t = _check_time(t)
    kind = kind or config.trajectory_kind
    a = config.acceleration
    if kind == "nonrelativistic":
        x = 0.5 * a * t**2
    else:
        # c^2/A (sqrt(1 + u^2) - 1), u = A t / c, rearranged to avoid cancellation
        u = a * t / config.c
        x = a * t**2 / (np.sqrt(1.0 + u**2) + 1.0)
    return float(x) if x.ndim == 0 else x


def trajectory_velocity(t, config: PhysicalConfig, kind: TrajectoryKind | None = None):
    t = _check_time(t)
    kind = kind or config.trajectory_kind
    a = config.acceleration
    if kind == "nonrelativistic":
        v = a * t
    else:
        v = a * t / np.sqrt(1.0 + (a * t / config.c) ** 2)
    return float(v) if v.ndim == 0 else v


def coupling_modulation(t, mode: ModeSpec, config: PhysicalConfig):
    """Instantaneous coupling ``g_n cos(k_n x_q(t))`` in rad/s."""
    if config.frozen_coupling:
        t = _check_time(t)
        out = np.full(t.shape, mode.g)
        return float(out) if out.ndim == 0 else out
    return mode.g * np.cos(mode.k * trajectory_position(t, config))


def annihilation(d: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr", dtype=complex)


def embed_qubit(op, config: PhysicalConfig) -> SparseOperator:
    return kron(SparseOperator.from_matrix(op), SparseOperator.from_matrix(sp.identity(config.dim // 2)))


def embed_mode(op, n: int, config: PhysicalConfig) -> SparseOperator:
    d = config.fock_cutoff
    factors = [sp.identity(2 * d**n)] + [op] + [sp.identity(d ** (config.n_modes - n - 1))]
    return kron(*[SparseOperator.from_matrix(f) for f in factors])


def mode_annihilator(n: int, config: PhysicalConfig) -> SparseOperator:
    return embed_mode(annihilation(config.fock_cutoff), n, config)


def free_hamiltonian(config: PhysicalConfig) -> SparseOperator:
    h = embed_qubit(0.5 * config.omega_q * SIGMA_Z, config)
    num = annihilation(config.fock_cutoff).T @ annihilation(config.fock_cutoff)
    for mode in config.modes:
        h = h + embed_mode(mode.omega * num, mode.index, config)
    return h


def interaction_operator(n: int, config: PhysicalConfig) -> SparseOperator:
    """``sigma_x (a_n^dag + a_n)`` on the full space (without the coupling strength)."""
    a = annihilation(config.fock_cutoff)
    return embed_qubit(SIGMA_X, config) @ embed_mode(a + a.T, n, config)


def build_hamiltonian(config: PhysicalConfig, t: float) -> SparseOperator:
    h = free_hamiltonian(config)
    for mode in config.modes:
        h = h + interaction_operator(mode.index, config) * float(coupling_modulation(t, mode, config))
    return h


def build_collapse_ops(config: PhysicalConfig) -> list[tuple[SparseOperator, float]]:
    """Jump operators and their rates: photon loss per mode, qubit decay, qubit dephasing."""
    if config.gamma_phi < 0:
        raise ValueError("T2 > 2*T1 gives a negative dephasing rate")
    ops = [(mode_annihilator(m.index, config), config.kappa) for m in config.modes]
    ops.append((embed_qubit(SIGMA_MINUS, config), config.gamma))
    ops.append((embed_qubit(SIGMA_Z, config), config.gamma_phi))
    return ops


def cherenkov_threshold(config: PhysicalConfig, n: int = 0) -> tuple[float, float]:
    """Threshold velocity ``(omega_n + omega_q)/k_n`` and the time ``v_c/A`` it is reached."""
    if not 0 <= n:
        raise ValueError(f"mode index must be non-negative, got {n}")
    mode = ModeSpec.from_fundamental(n, config.omega_0, config.g_0, config.k_0)
    v_c = (mode.omega + config.omega_q) / mode.k
    return v_c, v_c / config.acceleration
