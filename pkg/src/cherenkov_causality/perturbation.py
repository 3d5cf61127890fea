"""Leading-order counter-rotating transition probability |G,0> -> |E,1>.

With the parabolic trajectory ``x = A t^2 / 2`` the amplitude is the chirp
integral ``int_0^t g exp(i w tau) cos(k A tau^2 / 2) dtau`` with
``w = omega_0 + omega_q``.  It is evaluated two independent ways: through
complex error functions, and by adaptive Gauss-Kronrod quadrature.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .special import complex_erf, complex_erfi


@dataclass(frozen=True)
class PerturbationParams:
    g: float
    omega_sum: float
    k: float
    acceleration: float

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("g must be non-negative")
        for name in ("omega_sum", "k", "acceleration"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_config(cls, config, n: int = 0) -> "PerturbationParams":
        mode = config.modes[n] if n < config.n_modes else None
        if mode is None:
            raise ValueError(f"config has no mode {n}")
        return cls(mode.g, mode.omega + config.omega_q, mode.k, config.acceleration)

    @property
    def chirp_rate(self) -> float:
        return self.k * self.acceleration

    @property
    def threshold_time(self) -> float:
        return self.omega_sum / self.chirp_rate


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    return t


def transition_probability_closed_form(t, p: PerturbationParams):
    """Error-function form, evaluated as the difference of the boundary terms at ``tau = t`` and ``tau = 0``."""
    t = _check_t(t)
    kA = p.chirp_rate
    w = p.omega_sum
    u = (1 + 1j) / (2 * math.sqrt(kA))
    phase = cmath.exp(1j * (w * w / kA))

    def boundary(tau):
        return phase * complex_erf(u * (-kA * tau + w)) - complex_erfi(u * (kA * tau + w))

    b0 = boundary(0.0)
    flat = t.ravel()
    out = np.empty(flat.shape)
    for i, tau in enumerate(flat):
        out[i] = abs(boundary(tau) - b0) ** 2 if tau > 0 else 0.0
    out *= p.g**2 * math.pi / (8 * kA)
    out = out.reshape(t.shape)
    return float(out) if out.ndim == 0 else out


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _chirp(tau, w, kA):
    return np.exp(1j * w * tau) * np.cos(0.5 * kA * tau * tau)


def _gk15(a, b, w, kA):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    f = _chirp(mid[:, None] + half[:, None] * _NODES[None, :], w, kA)
    k = (f @ _WK) * half
    g = (f @ _WG15) * half
    resabs = (np.abs(f) @ _WK) * np.abs(half)
    fmean = (f @ _WK) / 2
    resasc = (np.abs(f - fmean[:, None]) @ _WK) * np.abs(half)
    err = np.abs(k - g)
    scale = np.where(resasc > 0, np.minimum(1.0, (200 * err / np.where(resasc > 0, resasc, 1)) ** 1.5), 1.0)
    err = np.where(resasc > 0, resasc * scale, err)
    err = np.maximum(err, 50 * np.finfo(float).eps * resabs)
    return k, err


def _phase_breakpoints(t_end, w, kA):
    # combined phase w tau + kA tau^2 / 2 bounds both chirp components; cut at quarter turns
    total = w * t_end + 0.5 * kA * t_end**2
    j = np.arange(1, int(total / (math.pi / 2)) + 1)
    return (-w + np.sqrt(w * w + 2 * kA * j * (math.pi / 2))) / kA


def chirp_amplitude(t, p: PerturbationParams, tol: float = 1e-12, max_rounds: int = 60):
    """Transition amplitude at each requested time, with an absolute error estimate.

    Panels start at quarter oscillations of the local phase and are bisected
    until the summed Gauss-Kronrod error estimate meets ``tol``.
    """
    t = _check_t(t)
    flat = t.ravel()
    amp = np.zeros(flat.shape, dtype=complex)
    errs = np.zeros(flat.shape)
    if p.g == 0 or flat.max(initial=0.0) == 0:
        return amp.reshape(t.shape), errs.reshape(t.shape)
    w, kA = p.omega_sum, p.chirp_rate
    t_end = flat.max()
    marks = np.unique(flat[flat > 0])
    edges = np.unique(np.concatenate([[0.0], _phase_breakpoints(t_end, w, kA), marks]))
    edges = edges[edges <= t_end]
    a, b = edges[:-1], edges[1:]
    val, err = _gk15(a, b, w, kA)
    for _ in range(max_rounds):
        if err.sum() <= tol / p.g:
            break
        bad = err > 0.5 * tol / p.g / len(err)
        m = 0.5 * (a[bad] + b[bad])
        na = np.concatenate([a[~bad], a[bad], m])
        nb = np.concatenate([b[~bad], m, b[bad]])
        order = np.argsort(na, kind="stable")
        a, b = na[order], nb[order]
        val, err = _gk15(a, b, w, kA)
    else:
        raise QuadratureError(
            f"chirp quadrature reached error estimate {p.g * err.sum():.3e} > {tol:.1e}", p.g * err.sum())
    cum = np.concatenate([[0], np.cumsum(val)])
    cerr = np.concatenate([[0], np.cumsum(err)])
    idx = np.searchsorted(b, flat, side="right")
    amp = p.g * cum[idx]
    errs = p.g * cerr[idx]
    return amp.reshape(t.shape), errs.reshape(t.shape)


def transition_probability_quadrature(t, p: PerturbationParams, tol: float = 1e-12):
    amp, _ = chirp_amplitude(t, p, tol=tol)
    out = np.abs(amp) ** 2
    return float(out) if out.ndim == 0 else out


def onset_time(P, window, n_samples: int = 4001) -> float | None:
    """Time of the steepest rise of ``P`` over ``window = (t0, t1)``.

    ``P`` is a callable of time (sampled on a uniform grid) or an array
    already sampled uniformly over the window.  Returns ``None`` when the
    largest slope is below 1e-15 per second.
    """
    t0, t1 = window
    if callable(P):
        times = np.linspace(t0, t1, n_samples)
        values = np.asarray(P(times), dtype=float)
    else:
        values = np.asarray(P, dtype=float)
        times = np.linspace(t0, t1, len(values))
    if len(values) < 3:
        raise ValueError("need at least three samples")
    slope = np.gradient(values, times)
    i = int(np.argmax(slope))
    if not slope[i] >= 1e-15:
        return None
    return float(times[i])
