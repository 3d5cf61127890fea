"""Small dense semidefinite programs with matrix-valued variables.

Problems are written in terms of Hermitian (or real symmetric) matrix
variables ``X_b``::

    minimize    sum_b Re tr(C_b X_b) + offset
    subject to  sum_terms w K X_b K^dag + F_const  >= 0     (each LMI)

Internally every variable is expanded in a real basis, giving the
inequality-form problem ``min c.y  s.t.  F(y) = F_0 + sum_i y_i F_i >= 0``;
complex LMI blocks are replaced by their real symmetric embedding
``[[Re M, -Im M], [Im M, Re M]]``.  The pair

    primal:  min c.y        s.t. F(y) >= 0
    dual:    max -<F_0, Z>  s.t. <F_i, Z> = c_i,  Z >= 0

is solved by an infeasible primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import itertools
import logging
from functools import partial
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import constants as C
from .errors import SolverError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Term:
    """``weight * K X_block K^dag``; ``K`` defaults to the identity."""

    block: int
    weight: float = 1.0
    congruence: np.ndarray | None = None


@dataclass
class Lmi:
    terms: list[Term]
    constant: np.ndarray

    @property
    def dim(self) -> int:
        return np.asarray(self.constant).shape[0]


@dataclass
class SdpProblem:
    """Minimise a linear function of matrix variables under LMIs.

    ``blocks`` lists ``(dimension, hermitian)`` per variable; ``objective``
    holds one coefficient matrix per block (``None`` for zero).
    """

    blocks: list[tuple[int, bool]]
    objective: list[np.ndarray | None]
    constraints: list[Lmi] = field(default_factory=list)
    offset: float = 0.0

    def __post_init__(self):
        if len(self.objective) != len(self.blocks):
            raise ValueError("need one objective matrix per block")
        for b, (n, herm) in enumerate(self.blocks):
            cb = self.objective[b]
            if cb is not None:
                cb = np.asarray(cb)
                if cb.shape != (n, n):
                    raise ValueError(f"objective block {b} has shape {cb.shape}, expected {(n, n)}")
                if np.max(np.abs(cb - cb.conj().T)) > 1e-12:
                    raise ValueError(f"objective block {b} is not Hermitian")
        for lmi in self.constraints:
            self._check_lmi(lmi)

    def _check_lmi(self, lmi: Lmi):
        f0 = np.asarray(lmi.constant)
        if f0.ndim != 2 or f0.shape[0] != f0.shape[1]:
            raise ValueError("LMI constant must be square")
        if np.max(np.abs(f0 - f0.conj().T), initial=0) > 1e-12:
            raise ValueError("LMI constant must be Hermitian")
        for t in lmi.terms:
            if not 0 <= t.block < len(self.blocks):
                raise ValueError(f"term refers to unknown block {t.block}")
            n = self.blocks[t.block][0]
            k = np.eye(n) if t.congruence is None else np.asarray(t.congruence)
            if k.shape != (lmi.dim, n):
                raise ValueError(f"congruence for block {t.block} has shape {k.shape}, expected {(lmi.dim, n)}")

    def add_lmi(self, terms: Sequence[Term], constant) -> None:
        lmi = Lmi(list(terms), np.asarray(constant))
        self._check_lmi(lmi)
        self.constraints.append(lmi)

    def add_psd(self, block: int) -> None:
        n = self.blocks[block][0]
        self.add_lmi([Term(block)], np.zeros((n, n)))


@dataclass
class SdpSolution:
    status: str  # "optimal" | "max-iterations" | "numerical-failure"
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    blocks: list[np.ndarray]
    dual_blocks: list[np.ndarray]
    iterations: int
    history: list[tuple[float, float, float, float]] = field(default_factory=list, repr=False)

    @property
    def value(self) -> float:
        return self.primal_value


# ---------------------------------------------------------------------------
# problem expansion


def _basis(n: int, hermitian: bool) -> list[np.ndarray]:
    out = []
    for i in range(n):
        e = np.zeros((n, n), complex)
        e[i, i] = 1
        out.append(e)
    for i, j in itertools.combinations(range(n), 2):
        e = np.zeros((n, n), complex)
        e[i, j] = e[j, i] = 1
        out.append(e)
        if hermitian:
            e = np.zeros((n, n), complex)
            e[i, j], e[j, i] = 1j, -1j
            out.append(e)
    return out


def _realify(m: np.ndarray) -> np.ndarray:
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def _expand(problem: SdpProblem):
    bases = [_basis(n, herm) for n, herm in problem.blocks]
    offsets = np.cumsum([0] + [len(b) for b in bases])
    m = int(offsets[-1])
    c = np.zeros(m)
    for b, cb in enumerate(problem.objective):
        if cb is not None:
            for k, e in enumerate(bases[b]):
                c[offsets[b] + k] = np.real(np.trace(np.asarray(cb) @ e))
    f0s, fis = [], []
    for lmi in problem.constraints:
        f0 = np.asarray(lmi.constant, dtype=complex)
        fi = np.zeros((m,) + f0.shape, dtype=complex)
        for t in lmi.terms:
            n = problem.blocks[t.block][0]
            k = np.eye(n) if t.congruence is None else np.asarray(t.congruence, dtype=complex)
            for j, e in enumerate(bases[t.block]):
                fi[offsets[t.block] + j] += t.weight * (k @ e @ k.conj().T)
        if np.any(f0.imag != 0) or np.any(fi.imag != 0):
            f0 = _realify(f0)
            fi = np.stack([_realify(x) for x in fi]) if m else np.zeros((0,) + f0.shape)
        f0s.append(f0.real.copy())
        fis.append(fi.real.copy())
    return bases, offsets, c, f0s, fis


def _assemble(y, bases, offsets):
    return [sum((y[offsets[b] + k] * e for k, e in enumerate(basis)), np.zeros_like(basis[0]))
            for b, basis in enumerate(bases)]


# ---------------------------------------------------------------------------
# interior point iteration (variables named after the standard form
#   min <Cm, X> s.t. <A_i, X> = b_i, X >= 0   /   max b.y s.t. sum y_i A_i + Z = Cm)
# with Cm = F_0, A_i = -F_i, b = -c; Z is the primal slack F(y).


def _inner(a, b):
    return sum(float(np.vdot(x, y).real) for x, y in zip(a, b))


def _sqrt_factor(a):
    """``L`` with ``L L^T = a`` and its inverse, from the eigendecomposition."""
    w, q = np.linalg.eigh(a)
    if w[0] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    r = np.sqrt(w)
    return q * r[None, :], (q / r[None, :]).T


def _max_step(v, d):
    """Largest alpha with v + alpha d >= 0 for diagonal positive ``v`` (vector) and symmetric ``d``."""
    s = 1.0 / np.sqrt(v)
    lo = np.linalg.eigvalsh(s[:, None] * d * s[None, :])[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _ipm_step(x, y, z, amat, rp, rd, mu, ntot, m):
    """One Mehrotra predictor-corrector step with Nesterov-Todd scaling."""
    gs, ginvs, lams = [], [], []
    for xk, zk in zip(x, z):
        lx, lxinv = _sqrt_factor(xk)
        lz, _ = _sqrt_factor(zk)
        u, sv, vt = np.linalg.svd(lz.T @ lx)
        if sv[-1] <= 0:
            raise np.linalg.LinAlgError("iterate left the cone")
        g = lx @ vt.T / np.sqrt(sv)[None, :]
        gs.append(g)
        ginvs.append(np.sqrt(sv)[:, None] * (vt @ lxinv))
        lams.append(sv)
    at = [np.einsum("ji,mjk,kl->mil", g, a, g) for g, a in zip(gs, amat)]
    rdt = [g.T @ r @ g for g, r in zip(gs, rd)]
    schur = sum(a.reshape(m, -1) @ a.reshape(m, -1).T for a in at)
    try:
        factor = scipy.linalg.cho_factor(schur)
        solve_schur = partial(scipy.linalg.cho_solve, factor)
    except np.linalg.LinAlgError:
        solve_schur = lambda r: np.linalg.lstsq(schur, r, rcond=None)[0]  # noqa: E731

    def direction(rcs):
        hs = [2 * rc / (lam[:, None] + lam[None, :]) for rc, lam in zip(rcs, lams)]
        rhs = rp - sum(np.tensordot(a, h - r, axes=([1, 2], [0, 1])) for a, h, r in zip(at, hs, rdt))
        dy = solve_schur(rhs)
        if not np.all(np.isfinite(dy)):
            raise np.linalg.LinAlgError("non-finite search direction")
        dz = [r - np.tensordot(dy, a, axes=1) for r, a in zip(rdt, at)]
        dx = [h - d for h, d in zip(hs, dz)]
        return dx, dy, dz

    def steps(dx, dz, frac):
        ap = min(min(_max_step(l, d) for l, d in zip(lams, dx)) * frac, 1.0)
        ad = min(min(_max_step(l, d) for l, d in zip(lams, dz)) * frac, 1.0)
        return ap, ad

    dxa, _, dza = direction([-np.diag(l * l) for l in lams])
    ap, ad = steps(dxa, dza, 1.0)
    mu_aff = sum(float(np.sum((np.diag(l) + ap * p) * (np.diag(l) + ad * q)))
                 for l, p, q in zip(lams, dxa, dza)) / ntot
    sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
    rcs = [sigma * mu * np.eye(len(l)) - np.diag(l * l) - 0.5 * (p @ q + q @ p) for l, p, q in zip(lams, dxa, dza)]
    dx, dy, dz = direction(rcs)
    ap, ad = steps(dx, dz, C.SDP_STEP_FRACTION)
    x = [xk + ap * (g @ d @ g.T) for xk, g, d in zip(x, gs, dx)]
    z = [zk + ad * (gi.T @ d @ gi) for zk, gi, d in zip(z, ginvs, dz)]
    x = [(k + k.T) / 2 for k in x]
    z = [(k + k.T) / 2 for k in z]
    return x, y + ad * dy, z


def solve_sdp(problem: SdpProblem, *, max_iter: int = C.SDP_MAX_ITER, gap_tol: float = C.SDP_GAP_STOP,
              residual_tol: float = 1e-9) -> SdpSolution:
    bases, offsets, c, f0s, fis = _expand(problem)
    m = len(c)
    cm = f0s
    amat = [-f for f in fis]  # per block, shape (m, n, n)
    b = -c
    nblocks = len(cm)
    if nblocks == 0:
        raise ValueError("problem has no constraints")
    ntot = sum(x.shape[0] for x in cm)

    scale = max(1.0, max(np.abs(x).max(initial=0) for x in cm), np.abs(b).max(initial=0))
    x = [10 * scale * np.eye(k.shape[0]) for k in cm]
    z = [10 * scale * np.eye(k.shape[0]) for k in cm]
    y = np.zeros(m)
    normb = 1 + np.linalg.norm(b)
    normc = 1 + np.sqrt(sum(np.sum(k * k) for k in cm))

    def a_op(mats):
        return sum(np.tensordot(a, mm, axes=([1, 2], [0, 1])) for a, mm in zip(amat, mats))

    def at_op(v):
        return [np.tensordot(v, a, axes=1) for a in amat]

    history = []
    status = "max-iterations"
    best = None  # (merit, iteration, x, y)
    it = 0
    for it in range(max_iter + 1):
        rp = b - a_op(x)
        aty = at_op(y)
        rd = [ck - zk - ak for ck, zk, ak in zip(cm, z, aty)]
        gap = _inner(x, z)
        pobj = float(c @ y)  # = -b.y
        dobj = -_inner(cm, x)
        pinf = float(np.sqrt(sum(np.sum(r * r) for r in rd)))
        dinf = float(np.linalg.norm(rp))
        if not np.all(np.isfinite([pobj, dobj, pinf, dinf])):
            # diverging iterates: typically an infeasible or unbounded problem
            status = "numerical-failure"
            break
        history.append((pobj, dobj, pinf, dinf))
        merit = max(abs(pobj - dobj) / C.SDP_GAP_OPTIMAL, pinf / C.SDP_RESIDUAL_OPTIMAL,
                    dinf / C.SDP_RESIDUAL_OPTIMAL)
        if best is None or merit < best[0]:
            best = (merit, it, x, y)
        if max(gap, abs(pobj - dobj)) < gap_tol and pinf / normc < residual_tol and dinf / normb < residual_tol:
            status = "optimal"
            break
        if it == max_iter:
            break
        if best[0] < 1.0 and it - best[1] >= 5:
            # stalled inside the optimality tolerances
            break
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                x, y, z = _ipm_step(x, y, z, amat, rp, rd, gap / ntot, ntot, m)
        except (np.linalg.LinAlgError, ValueError):
            status = "numerical-failure"
            break

    if best is None:
        raise SolverError("SDP iterates were not finite from the start")
    if status != "optimal":
        # numerical stall or iteration cap: fall back to the best iterate seen
        _, ib, x, y = best
        pobj, dobj, pinf, dinf = history[ib]
    else:
        pobj, dobj, pinf, dinf = history[-1]
    gap = pobj - dobj
    meets = abs(gap) < C.SDP_GAP_OPTIMAL and pinf < C.SDP_RESIDUAL_OPTIMAL and dinf < C.SDP_RESIDUAL_OPTIMAL
    if status != "optimal" and meets and it > 0:
        # stalled short of the stopping target but inside the optimality tolerances
        status = "optimal"
    if status == "optimal" and not (abs(gap) < C.SDP_GAP_OPTIMAL and pinf < C.SDP_RESIDUAL_OPTIMAL
                                    and dinf < C.SDP_RESIDUAL_OPTIMAL):
        status = "max-iterations"
    if status != "optimal":
        log.warning("SDP stopped with status %s after %d iterations (gap %.2e)", status, it, gap)
    return SdpSolution(
        status=status,
        primal_value=pobj + problem.offset,
        dual_value=dobj + problem.offset,
        gap=gap,
        primal_residual=pinf,
        dual_residual=dinf,
        blocks=_assemble(y, bases, offsets),
        dual_blocks=x,
        iterations=it,
        history=[(p + problem.offset, d + problem.offset, a, b_) for p, d, a, b_ in history],
    )


def lmi_slack(problem: SdpProblem, blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Evaluate every LMI at the given variable values (for independent feasibility checks)."""
    out = []
    for lmi in problem.constraints:
        s = np.array(lmi.constant, dtype=complex)
        for t in lmi.terms:
            n = problem.blocks[t.block][0]
            k = np.eye(n) if t.congruence is None else np.asarray(t.congruence)
            s = s + t.weight * (k @ blocks[t.block] @ k.conj().T)
        out.append(s)
    return out


def objective_value(problem: SdpProblem, blocks: Sequence[np.ndarray]) -> float:
    return problem.offset + sum(float(np.real(np.trace(cb @ xb)))
                                for cb, xb in zip(problem.objective, blocks) if cb is not None)


def deterministic_strategies(n_settings: int, n_outcomes: int) -> np.ndarray:
    """All deterministic response functions as a 0/1 table ``D[lambda, x, a]``.

    Row ``lambda`` enumerates outcome tuples ``(a_0, ..., a_{n_settings-1})``
    in lexicographic order.
    """
    if n_settings < 1 or n_outcomes < 1:
        raise ValueError("need at least one setting and one outcome")
    count = n_outcomes**n_settings
    if count > 1024:
        raise ValueError(f"{count} deterministic strategies exceed the cap of 1024")
    table = np.zeros((count, n_settings, n_outcomes), dtype=int)
    for lam, outcomes in enumerate(itertools.product(range(n_outcomes), repeat=n_settings)):
        table[lam, np.arange(n_settings), outcomes] = 1
    return table
