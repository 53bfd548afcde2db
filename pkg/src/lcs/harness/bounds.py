"""Recovery-bound verification suite.

Tiny seeded instances are solved with the fixed unit step (the setting of
the stability guarantees) and the measured per-iteration error is checked
against the evaluated bound wherever the exhaustively computed restricted
isometry constant certifies the bound's precondition. Instances whose
operator fails the precondition are reported as skipped, never as failed;
at the default desk-scale dimensions (12 x 14 spectral-normalized
Gaussians) the precondition delta < 1/sqrt(32) is in practice never met,
so the suite mostly documents how rarely such small random matrices
certify.
"""

import numpy as np

from ..analysis import RIP_CONDITION, rip_constant, theorem_bound
from ..lorentzian import estimate_gamma, ll2_norm
from ..operators import gaussian_ensemble
from ..solvers import SolverParams, liht, liht_pks
from ..util import derive_seed


def run_bound_suite(instances=200, base_seed=20250809, n=14, m=12, s=2,
                    t_max=25, noise_std=0.01, rel_slack=1e-12):
    """Check measured errors against bound(t) on certified tiny instances.

    Alternates k = 0 (no prior support) and k = 1 (one known index).
    Returns a summary dict with certified/skipped/violation counts and the
    worst observed margin min_t (bound(t) - error(t)) over certified runs.
    """
    certified = skipped = violations = 0
    worst_margin = np.inf
    details = []
    for i in range(instances):
        k = i % 2
        op = gaussian_ensemble(m, n, derive_seed(base_seed, 41, i),
                               normalization="spectral")
        rip_high = rip_constant(op, 3 * s - 2 * k, method="exhaustive")
        if rip_high.delta >= RIP_CONDITION:
            skipped += 1
            continue
        rip_low = rip_constant(op, 2 * s - k, method="exhaustive")
        certified += 1

        rng = np.random.default_rng(derive_seed(base_seed, 42, i))
        support = np.sort(rng.choice(n, size=s, replace=False))
        x0 = np.zeros(n)
        x0[support] = np.where(rng.random(s) < 0.5, -1.0, 1.0)
        z = rng.normal(0.0, noise_std, m)
        y = op.apply(x0) + z

        scale = estimate_gamma(y)
        params = SolverParams(s=s, gamma=scale, step_mode="fixed", mu=1.0,
                              max_iters=t_max, tol=0.0)
        if k:
            t0 = np.sort(rng.choice(support, size=k, replace=False))
            report = liht_pks(y, op, params, t0, keep_iterates=True)
        else:
            report = liht(y, op, params, keep_iterates=True)

        eps = ll2_norm(z, scale.gamma)
        bound = theorem_bound(rip_high, rip_low, scale.gamma, eps, m,
                              float(np.linalg.norm(x0)), t_max)
        errors = np.linalg.norm(x0[None, :] - report.iterates, axis=1)
        limit = bound.bound_at_t[:errors.size]
        margin = float(np.min(limit - errors))
        worst_margin = min(worst_margin, margin)
        bad = errors > limit * (1.0 + rel_slack)
        if bad.any():
            violations += 1
            details.append({"instance": i, "k": k,
                            "first_bad_t": int(np.argmax(bad)),
                            "delta_high": rip_high.delta,
                            "margin": margin})
    return {
        "instances": instances,
        "certified": certified,
        "skipped": skipped,
        "violations": violations,
        "worst_margin": None if certified == 0 else worst_margin,
        "condition": RIP_CONDITION,
        "dims": {"n": n, "m": m, "s": s, "t_max": t_max},
        "details": details,
    }


def format_bound_summary(summary):
    lines = [
        f"instances: {summary['instances']}",
        f"certified (delta < 1/sqrt(32) = {summary['condition']:.6f}): "
        f"{summary['certified']}",
        f"skipped (condition not met): {summary['skipped']}",
        f"violations: {summary['violations']}",
    ]
    if summary["worst_margin"] is not None:
        lines.append(f"worst margin (bound - error): {summary['worst_margin']:.3e}")
    for d in summary["details"]:
        lines.append(f"  VIOLATION instance={d['instance']} k={d['k']} "
                     f"t={d['first_bad_t']} delta={d['delta_high']:.4f}")
    return "\n".join(lines)
