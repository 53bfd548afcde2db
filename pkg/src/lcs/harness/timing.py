"""Reconstruction-time scaling benchmark for dense operators.

Protocol: m = n/2, s = 8, Cauchy measurement noise with scale 0.1, a fixed
iteration budget so per-iteration time is total/iterations, medians over a
few seeded trials. The per-iteration cost of the dense solve is O(m n), so
doubling n (with m = n/2) should multiply per-iteration time by about 4.
"""

import time

import numpy as np

from ..noise import NoiseSpec, corrupt
from ..operators import gaussian_ensemble
from ..solvers import SolverParams, liht
from ..util import derive_seed

DEFAULT_SIZES = (128, 256, 512, 1024, 2048)


def bench_timing(sizes=DEFAULT_SIZES, s=8, trials=5, iters=50, sigma=0.1,
                 base_seed=987, engine="auto"):
    """Time LIHT at each n with m = n/2; returns one dict per size with
    median per-iteration and total wall time plus the ratio to the
    previous size."""
    results = []
    for idx, n in enumerate(sizes):
        m = n // 2
        per_iter, totals = [], []
        for trial in range(trials):
            rng = np.random.default_rng(derive_seed(base_seed, 31, idx, trial))
            x0 = np.zeros(n)
            support = rng.choice(n, size=s, replace=False)
            x0[support] = np.sqrt(0.78 * m / s) * np.where(
                rng.random(s) < 0.5, -1.0, 1.0)
            op = gaussian_ensemble(m, n, derive_seed(base_seed, 32, idx, trial))
            ms = corrupt(op.apply(x0), NoiseSpec.cauchy(
                sigma, seed=derive_seed(base_seed, 33, idx, trial)))
            params = SolverParams(s=s, max_iters=iters, tol=0.0)
            t0 = time.perf_counter()
            report = liht(ms.y, op, params, engine=engine)
            dt = time.perf_counter() - t0
            totals.append(dt)
            per_iter.append(dt / max(report.iterations, 1))
        row = {"n": n, "m": m, "s": s, "trials": trials, "iters": iters,
               "median_per_iter": float(np.median(per_iter)),
               "median_total": float(np.median(totals))}
        if results:
            row["ratio_vs_prev"] = row["median_per_iter"] / results[-1]["median_per_iter"]
        results.append(row)
    return results


def format_timing_table(results):
    lines = [f"{'n':>6} {'m':>6} {'per-iter (s)':>14} {'total (s)':>12} {'ratio':>7}"]
    for row in results:
        ratio = f"{row['ratio_vs_prev']:.2f}" if "ratio_vs_prev" in row else "-"
        lines.append(f"{row['n']:>6} {row['m']:>6} "
                     f"{row['median_per_iter']:>14.6e} "
                     f"{row['median_total']:>12.4f} {ratio:>7}")
    return "\n".join(lines)
