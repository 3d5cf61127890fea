"""Command-line experiment runner.

``cherenkov-causality run CONFIG`` executes one experiment and writes CSV
files plus ``manifest.txt`` into the configured output directory;
``sweep CONFIG`` expands ``sweep.*`` lists into one subdirectory per
combination; ``validate CONFIG`` only parses.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .causality import causality_scan
from .config import ConfigError, RunConfig, load, load_sweep, read_pairs
from .dynamics import convergence_check, evolve, product_with_vacuum
from .errors import NumericalError
from .model import cherenkov_threshold

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
WORKERS_ENV = "CHERENKOV_SWEEP_WORKERS"
MANIFEST = "manifest.txt"

HEADERS = {
    "dynamics": "t,excitation_probability,coherence",
    "causality": "t,f,tsr,capacity_bound",
    "threshold": "n,v_c,t_star",
    "convergence": "cutoff_low,cutoff_high,max_deviation",
}


def _num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def format_csv(header: str, rows) -> bytes:
    lines = [header] + [",".join(_num(v) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("ascii")


def _dynamics(cfg: RunConfig) -> dict[str, bytes]:
    rho = product_with_vacuum(cfg.qubit_state(), cfg.physics)
    tr = evolve(rho, cfg.physics, cfg.grid)
    rows = zip(tr.times, tr.excitation_probability, tr.coherence)
    return {"dynamics.csv": format_csv(HEADERS["dynamics"], rows)}


def _threshold_rows(cfg: RunConfig):
    return [(n, *cherenkov_threshold(cfg.physics, n)) for n in range(cfg.physics.n_modes)]


def compute_outputs(cfg: RunConfig) -> dict[str, bytes]:
    """CSV file name to contents for one experiment."""
    if cfg.experiment == "threshold":
        return {"threshold.csv": format_csv(HEADERS["threshold"], _threshold_rows(cfg))}
    if cfg.experiment == "dynamics":
        return _dynamics(cfg)
    if cfg.experiment == "multimode":
        out = _dynamics(cfg)
        out["threshold.csv"] = format_csv(HEADERS["threshold"], _threshold_rows(cfg))
        return out
    if cfg.experiment == "causality":
        scan = causality_scan(cfg.physics, cfg.grid)
        return {"causality.csv": format_csv(HEADERS["causality"], scan.rows())}
    if cfg.experiment == "convergence":
        rep = convergence_check(cfg.physics, "excitation_probability", cfg.cutoffs, cfg.grid,
                                qubit_state=cfg.qubit_state())
        rows = [(lo, hi, d) for lo, hi, d in zip(rep.cutoffs[:-1], rep.cutoffs[1:], rep.deviations)]
        return {"convergence.csv": format_csv(HEADERS["convergence"], rows)}
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def write_manifest(directory: Path, cfg: RunConfig, outputs: dict[str, bytes], duration: float,
                   extra: dict[str, str] | None = None):
    lines = [f"version = {__version__}", f"duration_seconds = {duration:.6f}"]
    lines += [f"sweep.{k} = {v}" for k, v in (extra or {}).items()]
    lines += [f"config.{k} = {v}" for k, v in cfg.echo()]
    lines += [f"sha256.{name} = {hashlib.sha256(data).hexdigest()}" for name, data in sorted(outputs.items())]
    (directory / MANIFEST).write_text("\n".join(lines) + "\n")


def execute(cfg: RunConfig, directory: Path | None = None, extra: dict[str, str] | None = None) -> int:
    """Run one configuration; the manifest appears only if every output was written."""
    directory = Path(cfg.output_dir if directory is None else directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / MANIFEST).unlink(missing_ok=True)
    start = time.perf_counter()
    try:
        outputs = compute_outputs(cfg)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.error("numerical failure in %s: %s", directory, exc)
        return EXIT_NUMERICAL
    for name, data in outputs.items():
        (directory / name).write_bytes(data)
    write_manifest(directory, cfg, outputs, time.perf_counter() - start, extra)
    log.info("wrote %s", ", ".join(str(directory / n) for n in outputs))
    return EXIT_OK


def verify_manifest(directory) -> bool:
    """Check every ``sha256.*`` entry of a manifest against the files on disk."""
    directory = Path(directory)
    ok = True
    for line in (directory / MANIFEST).read_text().splitlines():
        key, _, value = (s.strip() for s in line.partition("="))
        if key.startswith("sha256."):
            data = (directory / key[len("sha256."):]).read_bytes()
            ok &= hashlib.sha256(data).hexdigest() == value
    return ok


def sweep_workers() -> int:
    text = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(text)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {text!r}")
    return n


def run_sweep(path) -> int:
    runs = load_sweep(path)
    workers = sweep_workers()
    root = runs[0][1].output_dir
    root.mkdir(parents=True, exist_ok=True)
    keys = list(runs[0][0])
    index = ["run," + ",".join(keys)]
    jobs = []
    for i, (swept, cfg) in enumerate(runs):
        name = f"run{i:03d}"
        index.append(name + "," + ",".join(swept[k] for k in keys))
        jobs.append((cfg, root / name, swept))
    (root / "sweep_index.csv").write_text("\n".join(index) + "\n")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(lambda job: execute(*job), jobs))
    return max(codes)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cherenkov-causality", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run one experiment"), ("sweep", "run every combination of sweep.* lists"),
                       ("validate", "parse and validate a config without running it")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="path to a key = value config file")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            if any(k.startswith("sweep.") for _, k, _ in read_pairs(args.config)):
                n = len(load_sweep(args.config))
                print(f"valid sweep with {n} combinations")
            else:
                cfg = load(args.config)
                print(f"valid {cfg.experiment} config")
            return EXIT_OK
        if args.command == "run":
            return execute(load(args.config))
        return run_sweep(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
