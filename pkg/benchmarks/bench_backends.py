"""Timing comparison of the compiled sweep kernel against the Python fallback.

Runs the same workloads under CECLUSTER_BACKEND=python and =c and reports
per-run wall time. Both backends produce bit-identical results, so the final
energies are printed once and cross-checked as a sanity guard.

The default profile keeps the Python side to roughly a minute; --full runs
the production-size datasets and can take tens of minutes on the fallback.

Usage: python benchmarks/bench_backends.py [--repeats N] [--full]
"""

import argparse
import os
import time

import numpy as np

from cecluster.datasets import generate, load_faithful
from cecluster.engine import CecConfig, run
from cecluster.models import FamilySpec


def workloads(full):
    n_mouse = 3000 if full else 800
    n_four = 3000 if full else 800
    n_mix = 1400 if full else 700
    return [
        (
            "faithful all k=2 nstart=10",
            load_faithful(),
            CecConfig(k=2, nstart=10, seed=0),
        ),
        (
            "mouse spherical k=10 nstart=10",
            generate("mouse", seed=0, n=n_mouse),
            CecConfig(k=10, families=[FamilySpec.spherical()] * 10, nstart=10, seed=0),
        ),
        (
            "fourgauss all k=10 nstart=10",
            generate("fourgauss", seed=1, n=n_four),
            CecConfig(k=10, nstart=10, seed=0),
        ),
        (
            "mixshapes fixedr+eigen k=7 nstart=10",
            generate("mixshapes", seed=2, n=n_mix),
            CecConfig(
                k=7,
                families=[FamilySpec.fixed_radius(350.0)] * 2
                + [FamilySpec.fixed_eigenvalues([9000.0, 8.0])] * 5,
                nstart=10,
                seed=0,
            ),
        ),
    ]


def bench_one(data, cfg, repeats):
    # one warm-up run, then the median of timed runs
    run(data, cfg)
    times = []
    energy = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = run(data, cfg)
        times.append(time.perf_counter() - t0)
        energy = res.final_energy
    return float(np.median(times)), energy


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--full", action="store_true", help="production-size datasets")
    args = parser.parse_args()

    rows = []
    for name, data, cfg in workloads(args.full):
        entry = {"name": name, "n": data.shape[0]}
        for backend in ("python", "c"):
            os.environ["CECLUSTER_BACKEND"] = backend
            seconds, energy = bench_one(data, cfg, args.repeats)
            entry[backend] = seconds
            entry.setdefault("energies", []).append(energy)
        rows.append(entry)

    width = max(len(r["name"]) for r in rows)
    print(f"{'workload':<{width}}  {'n':>6}  {'python':>10}  {'c':>10}  {'speedup':>8}")
    for r in rows:
        agree = "" if r["energies"][0] == r["energies"][1] else "  ENERGY MISMATCH"
        print(
            f"{r['name']:<{width}}  {r['n']:>6}  {r['python']:>9.3f}s  {r['c']:>9.3f}s"
            f"  {r['python'] / r['c']:>7.1f}x{agree}"
        )


if __name__ == "__main__":
    main()
