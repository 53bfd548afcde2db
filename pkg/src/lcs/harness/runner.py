"""Monte-Carlo experiment execution and aggregation.

Every trial derives its own RNG streams from (base_seed, stream tag,
sweep index, trial index), so results do not depend on execution order
and trials can fan out across a process pool unchanged.
"""

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..analysis import exact_recovery, rsnr
from ..lorentzian import gamma_from_clean_range
from ..noise import NoiseSpec
from ..operators import gaussian_ensemble, partial_hadamard
from ..solvers import (DivergenceError, SolverParams, clip_measurements,
                       liht, liht_pks, ls_iht, model_liht, reject_measurements)
from ..thresholding import BlockSparsityModel
from ..util import derive_seed
from .config import ExperimentConfig

# stream tags for derived seeds
_SIGNAL, _OPERATOR, _NOISE, _POLICY = 1, 2, 3, 4

CSV_HEADER = ("sweep_value", "solver_id", "mean_rsnr", "median_rsnr",
              "success_rate", "mean_iterations", "mean_wall_time", "trials")


@dataclass(frozen=True)
class ReportRow:
    sweep_value: float  # None for unswept experiments
    solver_id: str
    mean_rsnr: float
    median_rsnr: float
    success_rate: float
    mean_iterations: float
    mean_wall_time: float
    trials: int

    def as_csv_row(self):
        def fmt(v):
            return format(v, ".10g")
        return (("" if self.sweep_value is None else fmt(self.sweep_value)),
                self.solver_id, fmt(self.mean_rsnr), fmt(self.median_rsnr),
                fmt(self.success_rate), fmt(self.mean_iterations),
                fmt(self.mean_wall_time), str(self.trials))


def pks_policy(x0, fraction, policy, seed=0):
    """Pick floor(fraction * |T|) indices of the true support of x0.

    Policies: largest / smallest magnitude, or first-band (lowest index).
    Exact magnitude ties are resolved by a seeded shuffle, so equal-
    amplitude signals get a uniformly random known subset.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if policy not in ("largest", "smallest", "first-band"):
        raise ValueError(f"unknown policy {policy!r}")
    x0 = np.asarray(x0, dtype=np.float64)
    support = np.flatnonzero(x0)
    count = int(np.floor(fraction * support.size))
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if policy == "first-band":
        return support[:count].astype(np.int64)
    mags = np.abs(x0[support])
    shuffle = np.random.default_rng(seed).permutation(support.size)
    key = -mags if policy == "largest" else mags
    order = np.lexsort((shuffle, key))
    return np.sort(support[order[:count]]).astype(np.int64)


def _build_signal(n, s, amplitude, seed):
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(n, size=s, replace=False))
    signs = np.where(rng.random(s) < 0.5, -1.0, 1.0)
    x0 = np.zeros(n)
    x0[support] = amplitude * signs
    return x0


def _build_operator(spec, n, m, seed):
    if spec.kind == "dense":
        return gaussian_ensemble(m, n, seed, spec.normalization)
    return partial_hadamard(m, n, seed)


def _noise_spec(noise_dict, axis, value, seed):
    d = dict(noise_dict)
    if axis == "p":
        d["p"] = float(value)
    elif axis == "alpha":
        d["alpha"] = float(value)
    d["seed"] = seed
    return NoiseSpec.from_dict(d)


def _solver_params(spec, signal_s, clean):
    kw = dict(spec.params)
    kw.setdefault("s", signal_s)
    gamma = kw.get("gamma")
    if gamma == "auto":
        kw["gamma"] = None
    elif gamma == "clean-range":
        kw["gamma"] = gamma_from_clean_range(clean)
    return SolverParams(**kw)


def run_trial(config, sweep_index, trial):
    """Run every configured solver on one freshly drawn instance.

    Returns a list of per-solver record dicts (reports included)."""
    axis = config.sweep.axis if config.sweep else None
    value = config.sweep.values[sweep_index] if config.sweep else None
    n, s = config.signal.n, config.signal.s
    m = int(value) if axis == "m" else config.operator.m

    sig_seed = derive_seed(config.base_seed, _SIGNAL, sweep_index, trial)
    op_trial = 0 if config.pin_operator else trial
    op_seed = derive_seed(config.base_seed, _OPERATOR, sweep_index, op_trial)
    noise_seed = derive_seed(config.base_seed, _NOISE, sweep_index, trial)

    x0 = _build_signal(n, s, config.signal.amplitude, sig_seed)
    op = _build_operator(config.operator, n, m, op_seed)
    clean = op.apply(x0)
    spec = _noise_spec(config.noise, axis, value, noise_seed)
    from ..noise import corrupt
    ms = corrupt(clean, spec)

    records = []
    for si, solver in enumerate(config.solvers):
        params = _solver_params(solver, s, clean)
        y_use, op_use = ms.y, op
        if solver.preprocess is not None:
            lam = solver.preprocess["lambda_factor"] * float(np.max(np.abs(clean)))
            if solver.preprocess["kind"] == "clip":
                y_use = clip_measurements(y_use, lam)
            else:
                y_use, op_use = reject_measurements(y_use, op, lam)
        try:
            if solver.variant == "liht":
                report = liht(y_use, op_use, params)
            elif solver.variant == "ls_iht":
                report = ls_iht(y_use, op_use, params)
            elif solver.variant == "liht_pks":
                frac = solver.t0_policy["fraction"]
                if axis == "known-support-fraction":
                    frac = float(value)
                t0 = pks_policy(x0, frac, solver.t0_policy["policy"],
                                seed=derive_seed(config.base_seed, _POLICY,
                                                 sweep_index, trial, si))
                report = liht_pks(y_use, op_use, params, t0)
            else:
                model = BlockSparsityModel(solver.model["block_size"],
                                           solver.model["keep_blocks"])
                report = model_liht(y_use, op_use, params, model)
        except DivergenceError:
            if solver.fatal:
                raise
            records.append({"sweep_index": sweep_index, "sweep_value": value,
                            "trial": trial, "solver_id": solver.id,
                            "rsnr": 0.0, "success": False,
                            "iterations": params.max_iters, "wall_time": 0.0,
                            "diverged": True, "report": None})
            continue
        records.append({
            "sweep_index": sweep_index, "sweep_value": value, "trial": trial,
            "solver_id": solver.id,
            "rsnr": rsnr(x0, report.estimate),
            "success": exact_recovery(x0, report.estimate, config.success_tol),
            "iterations": report.iterations,
            "wall_time": report.wall_time,
            "diverged": False,
            "report": report,
        })
    return records


def _run_trial_task(args):
    config, sweep_index, trial = args
    records = run_trial(config, sweep_index, trial)
    for r in records:
        r["report"] = None  # keep inter-process payloads small
    return records


def aggregate(records, config):
    """Deterministic, order-insensitive reduction of trial records."""
    solver_order = {s.id: i for i, s in enumerate(config.solvers)}
    groups = {}
    for r in records:
        groups.setdefault((r["sweep_index"], r["solver_id"]), []).append(r)
    rows = []
    for (sweep_index, solver_id) in sorted(
            groups, key=lambda k: (k[0], solver_order[k[1]])):
        recs = sorted(groups[(sweep_index, solver_id)], key=lambda r: r["trial"])
        snrs = [r["rsnr"] for r in recs]
        rows.append(ReportRow(
            sweep_value=(None if recs[0]["sweep_value"] is None
                         else float(recs[0]["sweep_value"])),
            solver_id=solver_id,
            mean_rsnr=float(np.mean(snrs)),
            median_rsnr=float(statistics.median(snrs)),
            success_rate=float(np.mean([r["success"] for r in recs])),
            mean_iterations=float(np.mean([r["iterations"] for r in recs])),
            mean_wall_time=float(np.mean([r["wall_time"] for r in recs])),
            trials=len(recs),
        ))
    return rows


def run_experiment_records(config, threads=1):
    """Run the full sweep; returns (rows, records)."""
    sweep_count = len(config.sweep.values) if config.sweep else 1
    tasks = [(config, si, t) for si in range(sweep_count)
             for t in range(config.trials)]
    records = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for recs in pool.map(_run_trial_task, tasks, chunksize=1):
                records.extend(recs)
    else:
        for args in tasks:
            records.extend(run_trial(*args))
    return aggregate(records, config), records


def run_experiment(config, threads=1):
    """Run the experiment described by the config; one ReportRow per
    (sweep value, solver)."""
    rows, _ = run_experiment_records(config, threads=threads)
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buf.getvalue()


def write_outputs(rows, config, out_dir, extra_manifest=None):
    """Write <name>.csv, <name>_manifest.json, and per-solver plot-data
    files into out_dir. Returns the list of written paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    csv_path = os.path.join(out_dir, f"{config.name}.csv")
    with open(csv_path, "w") as fh:
        fh.write(rows_to_csv(rows))
    paths.append(csv_path)

    manifest = {
        "config": config.to_dict(),
        "seeds": {"base_seed": config.base_seed,
                  "streams": {"signal": _SIGNAL, "operator": _OPERATOR,
                              "noise": _NOISE, "policy": _POLICY}},
        "versions": {"lcs": __version__, "numpy": np.__version__},
    }
    from .. import backend
    manifest["backend"] = backend.BACKEND
    if extra_manifest:
        manifest.update(extra_manifest)
    man_path = os.path.join(out_dir, f"{config.name}_manifest.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(man_path)

    for solver in config.solvers:
        for metric in ("mean_rsnr", "success_rate"):
            lines = []
            for row in rows:
                if row.solver_id != solver.id:
                    continue
                x = "" if row.sweep_value is None else format(row.sweep_value, ".10g")
                lines.append(f"{x} {format(getattr(row, metric), '.10g')}\n")
            dat = os.path.join(out_dir, f"{config.name}__{solver.id}__{metric}.dat")
            with open(dat, "w") as fh:
                fh.writelines(lines)
            paths.append(dat)
    return paths
