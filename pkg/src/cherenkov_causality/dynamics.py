"""Time-dependent Lindblad integration, qubit observables and channel reconstruction.

Integration runs in the interaction picture of the free Hamiltonian
``H_0 = (omega_q/2) sigma_z + sum_n omega_n a_n^dag a_n``.  The jump
operators only pick up phases there, so the dissipators are unchanged,
while the fast free rotation no longer limits the RK4 accuracy.  Stored
states are rotated back to the lab frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from . import constants as C
from .errors import IntegrationError
from .kernels import get_advance
from .linalg import SIGMA_MINUS, SIGMA_PLUS, DensityMatrix, hermitian_eig, partial_trace
from .model import (
    PhysicalConfig,
    annihilation,
    build_collapse_ops,
    coupling_modulation,
    embed_mode,
    embed_qubit,
    trajectory_velocity,
)

KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``n_steps + 1`` stored times from ``t_start`` to ``t_end``."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if self.t_start < 0:
            raise ValueError("t_start must be non-negative")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("n_steps must be an integer >= 1")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)


@dataclass(frozen=True)
class Trajectory:
    """Stored times and states; ``states[i]`` is the state at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    dims: tuple[int, ...]

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.states[i], self.dims)

    def qubit_states(self) -> np.ndarray:
        if self.dims == (2,):
            return self.states
        return np.stack([partial_trace(s, self.dims, [0]) for s in self.states])

    @property
    def excitation_probability(self) -> np.ndarray:
        return self.qubit_states()[:, 0, 0].real.copy()

    @property
    def coherence(self) -> np.ndarray:
        return np.abs(self.qubit_states()[:, 0, 1])


# ---------------------------------------------------------------------------
# generator assembly


@dataclass
class _Generator:
    indptr: np.ndarray
    indices: np.ndarray
    base: np.ndarray
    terms: np.ndarray
    jrow: np.ndarray
    jcol: np.ndarray
    jval: np.ndarray
    joff: np.ndarray
    coefficients: Callable[[np.ndarray], np.ndarray]
    energies: np.ndarray
    max_frequency: Callable[[float], float] = field(repr=False, default=None)


def _rotating_frame_generator(config: PhysicalConfig) -> _Generator:
    d = config.fock_cutoff
    a = annihilation(d)
    ad = a.T.tocsr()
    sp_q, sm_q = embed_qubit(SIGMA_PLUS, config), embed_qubit(SIGMA_MINUS, config)
    ops, phases, modes = [], [], []
    for mode in config.modes:
        an, adn = embed_mode(a, mode.index, config), embed_mode(ad, mode.index, config)
        wp, wm = config.omega_q + mode.omega, config.omega_q - mode.omega
        for q, f, w in ((sp_q, adn, wp), (sp_q, an, wm), (sm_q, an, -wp), (sm_q, adn, -wm)):
            ops.append((q @ f).csr)
            phases.append(w)
            modes.append(mode)

    jumps = [(op, rate) for op, rate in build_collapse_ops(config) if rate > 0]
    n = config.dim
    base = sp.csr_matrix((n, n), dtype=complex)
    for op, rate in jumps:
        base = base - 0.5 * rate * (op.csr.conj().T @ op.csr)

    # shared sparsity pattern
    pattern = abs(base) + sp.identity(n)
    for o in ops:
        pattern = pattern + abs(o)
    pattern = sp.csr_matrix(pattern)
    pattern.sort_indices()
    coo = pattern.tocoo()
    rows, cols = coo.row, coo.col

    def on_pattern(m):
        return np.asarray(sp.csr_matrix(m)[rows, cols]).ravel().astype(complex)

    terms = np.array([-1j * on_pattern(o) for o in ops], dtype=complex).reshape(len(ops), -1)

    jr, jc, jv, joff = [], [], [], [0]
    for op, rate in jumps:
        jc_coo = op.csr.tocoo()
        jr.extend(jc_coo.row)
        jc.extend(jc_coo.col)
        jv.extend(math.sqrt(rate) * jc_coo.data)
        joff.append(len(jr))

    phases = np.asarray(phases)

    def coefficients(t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (len(ops),), dtype=complex)
        for m, mode in enumerate(modes):
            out[..., m] = coupling_modulation(t, mode, config) * np.exp(1j * phases[m] * t)
        return out

    decay = sum(rate for _, rate in jumps)

    def max_frequency(t_end):
        # fastest time scale of the generator up to t_end: coefficient oscillations of the
        # coupled modes, or the total dissipation rate
        coupled = [m for m in config.modes if m.g > 0]
        v = 0.0 if config.frozen_coupling else trajectory_velocity(t_end, config)
        osc = max((config.omega_q + m.omega + m.k * v for m in coupled), default=0.0)
        return max(osc, decay, 1.0)

    # lab-frame energies of the (diagonal) free Hamiltonian
    occ = np.arange(d, dtype=float)
    e = np.array([0.5 * config.omega_q, -0.5 * config.omega_q])
    for mode in config.modes:
        e = np.add.outer(e, mode.omega * occ).ravel()

    return _Generator(
        indptr=pattern.indptr.astype(np.int32),
        indices=pattern.indices.astype(np.int32),
        base=on_pattern(base),
        terms=np.ascontiguousarray(terms),
        jrow=np.asarray(jr, dtype=np.int32),
        jcol=np.asarray(jc, dtype=np.int32),
        jval=np.asarray(jv, dtype=complex),
        joff=np.asarray(joff, dtype=np.int32),
        coefficients=coefficients,
        energies=e,
        max_frequency=max_frequency,
    )


def step_size(config: PhysicalConfig, t_end: float, steps_per_period: int = C.STEPS_PER_PERIOD) -> float:
    """Largest RK4 step allowed: ``steps_per_period`` steps per period of the fastest coefficient."""
    gen = _rotating_frame_generator(config)
    return 2 * math.pi / gen.max_frequency(t_end) / steps_per_period


def propagate(rho0s, config: PhysicalConfig, times, *, keep_full=False, backend=None,
              steps_per_period=C.STEPS_PER_PERIOD, check_trace=True):
    """Propagate a batch of full-space operators and return them at ``times``.

    Returns an array ``(len(times), B, D, D)`` (or ``(len(times), B, 2, 2)``
    for reduced qubit operators) in the lab frame.  The inputs need not be
    states; the equation is linear.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a strictly increasing 1-d sequence")
    if times[0] != 0.0:
        raise ValueError("propagation starts at t = 0 (interaction switch-on)")
    rho = np.array(rho0s, dtype=complex, order="C")
    if rho.ndim == 2:
        rho = rho[None]
    n = config.dim
    if rho.shape[1:] != (n, n):
        raise ValueError(f"initial operators must be {n}x{n}, got {rho.shape[1:]}")
    rho = np.ascontiguousarray(rho)
    gen = _rotating_frame_generator(config)
    advance = get_advance(backend)
    dt_max = 2 * math.pi / gen.max_frequency(times[-1]) / steps_per_period
    dims = config.dims
    omega_q = config.omega_q
    u_q = np.array([0.5, -0.5]) * omega_q

    def store(t):
        if keep_full:
            ph = np.exp(-1j * gen.energies * t)
            return rho * ph[None, :, None] * ph.conj()[None, None, :]
        q = np.stack([partial_trace(r, dims, [0]) for r in rho])
        u = np.exp(-1j * u_q * t)
        return q * u[None, :, None] * u.conj()[None, None, :]

    out = [store(times[0])]
    traces0 = np.trace(rho, axis1=1, axis2=2)
    for t0, t1 in zip(times[:-1], times[1:]):
        nsub = max(1, math.ceil((t1 - t0) / dt_max - 1e-9))
        h = (t1 - t0) / nsub
        starts = t0 + h * np.arange(nsub)
        ts = np.stack([starts, starts + 0.5 * h, starts + h], axis=1)
        coef = np.ascontiguousarray(gen.coefficients(ts))
        advance(rho, gen.indptr, gen.indices, gen.base, gen.terms, coef, h,
                gen.jrow, gen.jcol, gen.jval, gen.joff)
        if not np.all(np.isfinite(rho)):
            raise IntegrationError(f"non-finite state at t={t1:.6e}s; reduce the step size (dt={h:.3e}s)")
        if check_trace:
            drift = np.max(np.abs(np.trace(rho, axis1=1, axis2=2) - traces0))
            if drift > C.TRACE_DRIFT_TOL:
                raise IntegrationError(
                    f"trace drifted by {drift:.3e} by t={t1:.6e}s; reduce the step size (dt={h:.3e}s)")
        out.append(store(t1))
    return np.stack(out)


def vacuum_state(config: PhysicalConfig) -> np.ndarray:
    v = np.zeros(config.dim // 2)
    v[0] = 1
    return np.diag(v).astype(complex)


def product_with_vacuum(rho_q, config: PhysicalConfig) -> np.ndarray:
    return np.kron(np.asarray(rho_q, dtype=complex), vacuum_state(config))


def _validate_states(states, times):
    for t, s in zip(times, states):
        asym = np.max(np.abs(s - s.conj().T))
        tr = np.trace(s).real
        if asym > C.STATE_HERMITIAN_TOL or abs(tr - 1) > C.STATE_TRACE_TOL:
            raise IntegrationError(f"state lost Hermiticity/trace at t={t:.6e}s (asym {asym:.2e}, trace {tr!r})")
        lo = np.linalg.eigvalsh((s + s.conj().T) / 2)[0]
        if lo < -C.STATE_POSITIVITY_TOL:
            raise IntegrationError(f"state lost positivity at t={t:.6e}s (min eigenvalue {lo:.3e})")


def evolve(rho0, config: PhysicalConfig, grid: TimeGrid, *, keep_full=False, backend=None,
           steps_per_period=C.STEPS_PER_PERIOD) -> Trajectory:
    """Solve the master equation from ``rho0`` (a full-space state) at the grid times.

    The integration starts at t = 0; grid times before ``grid.t_start`` are
    integrated through but not stored.
    """
    m = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    DensityMatrix(m, config.dims)
    times = grid.times
    lead = [0.0] if times[0] > 0 else []
    full = np.concatenate([lead, times])
    res = propagate(m, config, full, keep_full=keep_full, backend=backend, steps_per_period=steps_per_period)
    res = res[len(lead):, 0]
    _validate_states(res, times)
    dims = config.dims if keep_full else (2,)
    return Trajectory(times, res, dims)


def reduced_qubit_state(rho, dims: Sequence[int] | None = None) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        m, dims = rho.matrix, rho.dims
    else:
        m = np.asarray(rho)
        dims = tuple(dims) if dims is not None else (2, m.shape[0] // 2)
    return DensityMatrix(partial_trace(m, dims, [0]), (2,))


def _qubit_matrix(rho_q):
    m = rho_q.matrix if isinstance(rho_q, DensityMatrix) else np.asarray(rho_q)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 qubit state, got {m.shape}")
    return m


def excitation_probability(rho_q) -> float:
    """Population of |E>."""
    return float(_qubit_matrix(rho_q)[0, 0].real)


def coherence(rho_q) -> float:
    """Modulus of <E|rho|G>."""
    return float(abs(_qubit_matrix(rho_q)[0, 1]))


# ---------------------------------------------------------------------------
# channels


def _vec(m):
    return np.asarray(m, dtype=complex).reshape(-1)


@dataclass(frozen=True)
class Channel:
    """Qubit map stored as a 4x4 superoperator acting on row-major vectorised matrices."""

    superoperator: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.array(self.superoperator, dtype=complex)
        if s.shape != (4, 4):
            raise ValueError(f"superoperator must be 4x4, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "superoperator", s)

    @classmethod
    def from_images(cls, images, time=0.0) -> "Channel":
        """Build from ``images[i][j] = N(|i><j|)``."""
        cols = [_vec(images[i][j]) for i in range(2) for j in range(2)]
        return cls(np.stack(cols, axis=1), time)

    @classmethod
    def from_kraus(cls, kraus, time=0.0) -> "Channel":
        s = sum(np.kron(k, k.conj()) for k in kraus)
        return cls(s, time)

    @classmethod
    def identity(cls, time=0.0) -> "Channel":
        return cls(np.eye(4), time)

    @classmethod
    def depolarizing(cls, p=1.0, time=0.0) -> "Channel":
        """``rho -> (1-p) rho + p tr(rho) I/2``."""
        s = (1 - p) * np.eye(4) + p * np.outer(_vec(np.eye(2) / 2), _vec(np.eye(2)))
        return cls(s, time)

    @classmethod
    def replacement(cls, state, time=0.0) -> "Channel":
        return cls(np.outer(_vec(state), _vec(np.eye(2))), time)

    def image(self, i: int, j: int) -> np.ndarray:
        e = np.zeros((2, 2), complex)
        e[i, j] = 1
        return self(e)

    def __call__(self, rho) -> np.ndarray:
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return (self.superoperator @ _vec(m)).reshape(2, 2)

    def choi(self) -> np.ndarray:
        """``sum_ij N(|i><j|) (x) |i><j|`` (output factor first)."""
        out = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                e = np.zeros((2, 2), complex)
                e[i, j] = 1
                out += np.kron(self(e), e)
        return out

    def tp_error(self) -> float:
        return float(np.max(np.abs(partial_trace(self.choi(), [2, 2], [1]) - np.eye(2))))

    def cp_violation(self) -> float:
        return float(max(0.0, -hermitian_eig(self.choi(), tol=1e-6)[0][0]))

    def compose(self, other: "Channel") -> "Channel":
        """``self`` after ``other``."""
        return Channel(self.superoperator @ other.superoperator, max(self.time, other.time))


def apply_channel(channel: Channel, rho_q) -> DensityMatrix:
    return DensityMatrix(channel(rho_q), (2,))


def _channels_from_batch(images, times):
    out = []
    for t, (ee, gg, eg) in zip(times, images):
        imgs = [[ee, eg], [eg.conj().T, gg]]
        ch = Channel.from_images(imgs, float(t))
        if ch.cp_violation() > C.CHANNEL_CP_TOL or ch.tp_error() > C.CHANNEL_TP_TOL:
            raise IntegrationError(
                f"reconstructed map at t={t:.6e}s is not CPTP (CP violation {ch.cp_violation():.2e}, "
                f"TP error {ch.tp_error():.2e}); integration is inaccurate")
        out.append(ch)
    return out


def reconstruct_channels(config: PhysicalConfig, times, *, backend=None,
                         steps_per_period=C.STEPS_PER_PERIOD) -> list[Channel]:
    """Qubit dynamical maps from t=0 to each of ``times`` (field starts in vacuum).

    Propagates |E><E|, |G><G| and |E><G| tensored with the vacuum; the
    image of |G><E| follows by Hermiticity preservation.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    lead = [0.0] if times[0] > 0 else []
    full = np.concatenate([lead, times])
    basis = []
    for i, j in ((0, 0), (1, 1), (0, 1)):
        e = np.zeros((2, 2), complex)
        e[i, j] = 1
        basis.append(product_with_vacuum(e, config))
    res = propagate(np.stack(basis), config, full, backend=backend, steps_per_period=steps_per_period,
                    check_trace=False)
    res = res[len(lead):]
    drift = max(abs(np.trace(res[:, 0], axis1=1, axis2=2) - 1).max(),
                abs(np.trace(res[:, 1], axis1=1, axis2=2) - 1).max())
    if drift > C.TRACE_DRIFT_TOL:
        raise IntegrationError(f"trace drifted by {drift:.3e}; reduce the step size")
    return _channels_from_batch(res, times)


def reconstruct_channel(config: PhysicalConfig, t: float, **kwargs) -> Channel:
    if t < 0:
        raise ValueError("t must be non-negative")
    return reconstruct_channels(config, [t], **kwargs)[0]


@dataclass(frozen=True)
class ConvergenceReport:
    cutoffs: tuple[int, ...]
    deviations: tuple[float, ...]  # between successive cutoffs

    @property
    def max_deviation(self) -> float:
        return max(self.deviations)

    @property
    def converged(self) -> bool:
        return self.deviations[-1] < C.CONVERGENCE_TOL


_OBSERVABLES = {
    "excitation_probability": lambda tr: tr.excitation_probability,
    "coherence": lambda tr: tr.coherence,
}


def convergence_check(config: PhysicalConfig, observable, cutoffs: Sequence[int], grid: TimeGrid,
                      qubit_state=None, **kwargs) -> ConvergenceReport:
    """Rerun ``observable`` at each Fock cutoff and compare successive runs (sup norm over the grid).

    ``observable`` is a name in ``{"excitation_probability", "coherence"}``
    or a callable mapping a :class:`Trajectory` to an array.
    """
    cutoffs = list(cutoffs)
    if len(cutoffs) < 2:
        raise ValueError("convergence_check needs at least two cutoffs")
    fn = _OBSERVABLES[observable] if isinstance(observable, str) else observable
    rho_q = np.outer(KET_G, KET_G) if qubit_state is None else np.asarray(qubit_state, dtype=complex)
    values = []
    for d in cutoffs:
        cfg = config.with_(fock_cutoff=d)
        values.append(np.asarray(fn(evolve(product_with_vacuum(rho_q, cfg), cfg, grid, **kwargs))))
    devs = tuple(float(np.max(np.abs(b - a))) for a, b in zip(values[:-1], values[1:]))
    return ConvergenceReport(tuple(cutoffs), devs)


def transition_times(times, values, n: int, *, smooth: float = 5e-9, prominence: float = 0.2) -> np.ndarray:
    """Times of the ``n`` most prominent maxima of ``d values / dt``, in increasing order.

    ``values`` is first smoothed by a moving average over ``smooth`` seconds
    to suppress the fast counter-rotating wiggles; peaks whose prominence is
    below ``prominence`` times the largest slope are ignored, so fewer than
    ``n`` times may come back.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1 or len(times) < 3:
        raise ValueError("times and values must be matching 1-d arrays with at least three samples")
    width = max(1, int(round(smooth / np.mean(np.diff(times)))))
    slope = np.gradient(uniform_filter1d(values, width, mode="nearest"), times)
    if not slope.max() > 0:
        return np.empty(0)
    peaks, props = find_peaks(slope, prominence=prominence * slope.max())
    top = peaks[np.argsort(props["prominences"])[::-1][:n]]
    return np.sort(times[top])
