"""Compare the compiled RK4 kernel against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernel.py [--t-end 1e-7] [--repeat 3]

Both backends propagate the same batch (the three channel-reconstruction
inputs) over the same step sequence; the script reports the best wall time
of each, the speed-up, and the largest difference between their outputs.
"""

import argparse
import time

import numpy as np

from cherenkov_causality.dynamics import KET_E, KET_G, product_with_vacuum, propagate
from cherenkov_causality.kernels import BACKENDS
from cherenkov_causality.model import PhysicalConfig


def _inputs(cfg):
    return np.stack([product_with_vacuum(np.outer(a, b), cfg)
                     for a, b in ((KET_E, KET_E), (KET_G, KET_G), (KET_E, KET_G))])


def bench(cfg, t_end, repeat):
    rho = _inputs(cfg)
    times = np.linspace(0, t_end, 11)
    results = {}
    for name in sorted(BACKENDS):
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = propagate(rho, cfg, times, backend=name, check_trace=False)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, out)
    return results


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t-end", type=float, default=1e-7)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    configs = {
        "N=1 d=5": PhysicalConfig(),
        "N=2 d=3": PhysicalConfig(n_modes=2, fock_cutoff=3),
    }
    for label, cfg in configs.items():
        res = bench(cfg, args.t_end, args.repeat)
        print(f"{label} (dim {cfg.dim}, batch 3, t_end {args.t_end:g} s)")
        for name, (sec, _) in res.items():
            print(f"  {name:<9s} {sec:8.3f} s")
        if "compiled" in res:
            py, co = res["python"], res["compiled"]
            print(f"  speed-up  {py[0] / co[0]:8.2f}x")
            print(f"  max |diff| {np.max(np.abs(py[1] - co[1])):.2e}")
        else:
            print("  compiled extension not built; only the fallback ran")


if __name__ == "__main__":
    main()
