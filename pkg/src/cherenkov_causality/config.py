"""Run configuration: a flat ``key = value`` text format with dotted sections.

Example::

    # comments start with '#'
    experiment = dynamics
    physics.g_0 = 2.513274e8
    physics.acceleration = 1e15
    grid.t_end = 4e-7
    grid.n_steps = 200
    initial.state = ground
    output.directory = results

Sweep files add ``sweep.<key> = v1, v2, ...`` lines naming any ``physics.*``
or ``grid.*`` key; every combination of the listed values becomes one run.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .dynamics import TimeGrid
from .model import PhysicalConfig

EXPERIMENTS = ("dynamics", "threshold", "causality", "multimode", "convergence")
INITIAL_STATES = ("ground", "plus", "bloch")
MAX_SWEEP = 64


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _parse_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {text!r}")
    return v


def _parse_optional(parser):
    return lambda text: None if text.lower() == "auto" else parser(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(_parse_int(v) for v in _split(text))


def _parse_bloch(text: str) -> tuple[float, float, float]:
    vals = tuple(_parse_float(v) for v in _split(text))
    if len(vals) != 3:
        raise ValueError("a Bloch vector needs three components")
    if np.linalg.norm(vals) > 1 + 1e-12:
        raise ValueError(f"Bloch vector {vals} lies outside the unit ball")
    return vals


def _split(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ValueError(f"malformed list {text!r}")
    return parts


_PHYSICS = {
    "omega_q": _parse_float, "omega_0": _parse_float, "k_0": _parse_float, "g_0": _parse_float,
    "acceleration": _parse_float, "c": _parse_float, "n_modes": _parse_int,
    "fock_cutoff": _parse_optional(_parse_int), "T1": _parse_float, "T2": _parse_float,
    "kappa": _parse_float, "trajectory_kind": _parse_optional(str), "enforce_weak_coupling": _parse_bool,
    "frozen_coupling": _parse_bool,
}
_GRID = {"t_start": _parse_float, "t_end": _parse_float, "n_steps": _parse_int}

SCHEMA = {
    "experiment": str,
    **{f"physics.{k}": v for k, v in _PHYSICS.items()},
    **{f"grid.{k}": v for k, v in _GRID.items()},
    "initial.state": str,
    "initial.bloch": _parse_bloch,
    "convergence.cutoffs": _parse_int_list,
    "output.directory": str,
}
SWEEPABLE = tuple(k for k in SCHEMA if k.startswith(("physics.", "grid.")))
_GRID_DEFAULTS = {"t_start": 0.0, "t_end": 4e-7, "n_steps": 200}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    physics: PhysicalConfig
    grid: TimeGrid
    initial_state: str = "ground"
    bloch: tuple[float, float, float] | None = None
    cutoffs: tuple[int, ...] = ()
    output_dir: Path = Path("results")
    raw: dict = field(default_factory=dict, compare=False)

    def qubit_state(self) -> np.ndarray:
        """Initial qubit density matrix in the ``(|E>, |G>)`` basis."""
        if self.initial_state == "ground":
            r = (0.0, 0.0, -1.0)
        elif self.initial_state == "plus":
            r = (1.0, 0.0, 0.0)
        else:
            r = self.bloch
        x, y, z = r
        return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])

    def echo(self) -> list[tuple[str, str]]:
        """Resolved settings as ``(key, value)`` pairs, in schema order."""
        out = [("experiment", self.experiment)]
        for f in fields(PhysicalConfig):
            out.append((f"physics.{f.name}", _fmt(getattr(self.physics, f.name))))
        for k in _GRID:
            out.append((f"grid.{k}", _fmt(getattr(self.grid, k))))
        out.append(("initial.state", self.initial_state))
        if self.bloch is not None:
            out.append(("initial.bloch", ", ".join(_fmt(v) for v in self.bloch)))
        if self.cutoffs:
            out.append(("convergence.cutoffs", ", ".join(str(v) for v in self.cutoffs)))
        out.append(("output.directory", str(self.output_dir)))
        return out


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_pairs(path) -> list[tuple[int, str, str]]:
    """``(line number, key, value)`` for every assignment in the file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = []
    seen = set()
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {num}: duplicate key {key!r}")
        seen.add(key)
        out.append((num, key, value))
    return out


def build_run_config(values: dict[str, str]) -> RunConfig:
    """Validate raw string values against the schema and the physical invariants."""
    parsed = {}
    for key, text in values.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        try:
            parsed[key] = SCHEMA[key](text)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    exp = parsed.get("experiment")
    if exp is None:
        raise ConfigError("missing required key 'experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    state = parsed.get("initial.state", "ground")
    if state not in INITIAL_STATES:
        raise ConfigError(f"initial.state must be one of {', '.join(INITIAL_STATES)}, got {state!r}")
    bloch = parsed.get("initial.bloch")
    if (state == "bloch") != (bloch is not None):
        raise ConfigError("initial.bloch is required with, and only with, initial.state = bloch")
    if exp == "causality" and ("initial.state" in parsed or bloch is not None):
        raise ConfigError("causality experiments always start from I/2; remove the initial.* keys")
    cutoffs = parsed.get("convergence.cutoffs", ())
    if exp == "convergence" and len(cutoffs) < 2:
        raise ConfigError("convergence experiments need convergence.cutoffs with at least two entries")
    if exp != "convergence" and cutoffs:
        raise ConfigError("convergence.cutoffs only applies to convergence experiments")
    phys = {k.split(".", 1)[1]: v for k, v in parsed.items() if k.startswith("physics.")}
    grid = {**_GRID_DEFAULTS, **{k.split(".", 1)[1]: v for k, v in parsed.items() if k.startswith("grid.")}}
    try:
        physics = PhysicalConfig(**phys)
        tgrid = TimeGrid(**grid)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if exp == "multimode" and physics.n_modes < 2:
        raise ConfigError("multimode experiments need physics.n_modes >= 2")
    return RunConfig(exp, physics, tgrid, state, bloch, cutoffs,
                     Path(parsed.get("output.directory", "results")), dict(values))


def load(path) -> RunConfig:
    pairs = read_pairs(path)
    if any(k.startswith("sweep.") for _, k, _ in pairs):
        raise ConfigError("sweep keys found; use the sweep subcommand")
    return build_run_config({k: v for _, k, v in pairs})


def load_sweep(path) -> list[tuple[dict[str, str], RunConfig]]:
    """Expand a sweep file into ``(swept values, run config)`` per combination, in a fixed order."""
    pairs = read_pairs(path)
    base = {k: v for _, k, v in pairs if not k.startswith("sweep.")}
    axes = []
    for _, key, value in pairs:
        if not key.startswith("sweep."):
            continue
        target = key[len("sweep."):]
        if target not in SWEEPABLE:
            raise ConfigError(f"{key}: cannot sweep {target!r}")
        if target in base:
            raise ConfigError(f"{target!r} is both fixed and swept")
        items = [v.strip() for v in value.split(",")] if value.strip() else []
        if not items or any(v == "" for v in items):
            raise ConfigError(f"{key}: empty parameter list")
        axes.append((target, items))
    if not axes:
        raise ConfigError("sweep file has no sweep.* keys")
    size = math.prod(len(v) for _, v in axes)
    if size > MAX_SWEEP:
        raise ConfigError(f"sweep has {size} combinations, more than the limit of {MAX_SWEEP}")
    runs = []
    for combo in itertools.product(*(v for _, v in axes)):
        swept = dict(zip((k for k, _ in axes), combo))
        runs.append((swept, build_run_config({**base, **swept})))
    return runs
