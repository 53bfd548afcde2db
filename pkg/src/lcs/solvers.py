"""Iterative solvers: Lorentzian-weighted and least-squares hard
thresholding, the partially-known-support and model-projection variants,
and the measurement clipping/rejection baselines.

All variants share one engine: starting from x = 0, iterate

    x <- P(x + mu * Phi^T W (y - Phi x))

where P is a hard-thresholding (or model) projection and W is either the
Lorentzian diagonal reweighting or the identity. The step size is either
fixed or the per-support normalized ratio, guarded by a geometric
backtracking line search whenever the active support changes and the
objective would otherwise increase.

Dense operators run through the compiled loop in lcs._core when it is
available; everything else (matrix-free operators, model projections, or
a pure install) runs through the NumPy engine below. The two paths share
semantics exactly: same tie-breaks, step rule, guard, and stopping rule.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .lorentzian import LorentzianScale, estimate_gamma, ll2_norm
from .lorentzian import weights as lorentzian_weights
from .operators import DenseOperator
from .thresholding import (hard_threshold, hard_threshold_pks, pks_kept_set,
                           top_magnitude_indices)
from .util import as_support, support_digest

STALL_EPS = 1e-300


class SolverError(Exception):
    pass


class DivergenceError(SolverError):
    """Non-finite values encountered while iterating."""

    def __init__(self, iteration, detail="non-finite values encountered"):
        self.iteration = iteration
        super().__init__(f"diverged at iteration {iteration}: {detail}")


class StepStallError(SolverError):
    """Adaptive step denominator vanished: gradient is in the null space of
    the restricted operator."""


@dataclass(frozen=True)
class SolverParams:
    """Knobs shared by every solver variant.

    gamma = None estimates the Lorentzian scale from y once before
    iterating; a float or LorentzianScale pins it. step_mode "adaptive"
    uses the normalized per-support step with backtracking; "fixed" uses
    mu as given (the setting under which the recovery guarantees are
    stated) and never backtracks.
    """

    s: int
    gamma: object = None
    step_mode: str = "adaptive"
    mu: float = 1.0
    max_iters: int = 300
    tol: float = 1e-6
    backtrack_max: int = 30
    weight_mode: str = "lorentzian"

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("sparsity target must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        if self.backtrack_max < 0:
            raise ValueError("backtrack_max must be non-negative")
        if self.step_mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown step_mode {self.step_mode!r}")
        if self.step_mode == "fixed" and not self.mu > 0:
            raise ValueError("fixed step requires mu > 0")
        if self.weight_mode not in ("lorentzian", "identity"):
            raise ValueError(f"unknown weight_mode {self.weight_mode!r}")
        if self.gamma is not None and not isinstance(self.gamma, LorentzianScale):
            g = float(self.gamma)
            if not np.isfinite(g) or g <= 0:
                raise ValueError("gamma must be positive and finite")


@dataclass
class SolveReport:
    """Outcome of one solver run.

    objective_trace holds the LL2 objective for Lorentzian-weighted runs
    and the squared l2 residual for identity-weighted runs; its length is
    iterations + 1 (the entry at index 0 belongs to x = 0). supports,
    support_changed and backtracks_per_iter carry the per-iteration
    diagnostics needed to audit the monotonicity guarantee.
    """

    estimate: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    stop_reason: str  # "max-iters" | "converged" | "stalled"
    backtracks: int
    support_trace_hash: str
    wall_time: float
    gamma: float
    gamma_source: str
    stall_events: int
    support_changed: np.ndarray
    backtracks_per_iter: np.ndarray
    supports: list
    iterates: np.ndarray = None


def adaptive_step(g, op, w, support):
    """Normalized step ||g_S||^2 / ||W^(1/2) Phi_S g_S||^2.

    Returns 0.0 when the restricted gradient vanishes (a convergence
    signal, not an error); raises StepStallError when the denominator
    underflows, meaning the restricted gradient sits in the null space.
    """
    g = np.asarray(g, dtype=np.float64)
    support = as_support(support, op.n)
    if support.size == 0:
        raise ValueError("adaptive step needs a nonempty support")
    gs = g[support]
    num = float(gs @ gs)
    if num == 0.0:
        return 0.0
    col = op.apply_columns(support, gs)
    if w is not None:
        den = float(np.dot(np.asarray(w) * col, col))
    else:
        den = float(col @ col)
    if den < STALL_EPS:
        raise StepStallError("restricted gradient lies in the operator null space")
    return num / den


def line_search_guard(x, gradient, mu, project, objective, current_objective,
                      backtrack_max=30):
    """Accept a candidate step, halving mu while the support changed and the
    objective increased.

    Returns (candidate, objective, mu, backtracks, stalled). When
    backtrack_max halvings do not restore descent, the best candidate seen
    is accepted and stalled is True. Mirrors the in-engine guard.
    """
    x = np.asarray(x, dtype=np.float64)
    gradient = np.asarray(gradient, dtype=np.float64)
    cand = project(x + mu * gradient)
    obj = float(objective(cand))
    if np.isnan(obj):
        obj = np.inf
    bt = 0
    stalled = False
    xsupp = np.flatnonzero(x)
    if not np.array_equal(xsupp, np.flatnonzero(cand)) and obj > current_objective:
        best_obj, best_cand = obj, cand
        while obj > current_objective and bt < backtrack_max:
            mu *= 0.5
            bt += 1
            cand = project(x + mu * gradient)
            obj = float(objective(cand))
            if np.isnan(obj):
                obj = np.inf
            if obj < best_obj:
                best_obj, best_cand = obj, cand
        if obj > current_objective:
            obj, cand = best_obj, best_cand
            stalled = True
    return cand, obj, mu, bt, stalled


def clip_measurements(y, lam):
    """Clamp every measurement into [-lam, lam]."""
    if not lam > 0:
        raise ValueError("clipping threshold must be positive")
    return np.clip(np.asarray(y, dtype=np.float64), -lam, lam)


def reject_measurements(y, op, lam):
    """Discard measurements with |y_i| >= lam.

    Returns the reduced measurement vector and the operator restricted to
    the surviving rows. Raises if nothing survives.
    """
    if not lam > 0:
        raise ValueError("rejection threshold must be positive")
    y = np.asarray(y, dtype=np.float64)
    keep = np.flatnonzero(np.abs(y) < lam)
    if keep.size == 0:
        raise ValueError("all measurements rejected")
    return y[keep], op.restrict_rows(keep)


def liht(y, op, params, keep_iterates=False, engine="auto"):
    """Lorentzian iterative hard thresholding (plain variant)."""
    return _solve(y, op, params, t0=None, model=None,
                  keep_iterates=keep_iterates, engine=engine)


def ls_iht(y, op, params, keep_iterates=False, engine="auto"):
    """Least-squares IHT: identical machinery with identity weights."""
    return _solve(y, op, replace(params, weight_mode="identity"), t0=None,
                  model=None, keep_iterates=keep_iterates, engine=engine)


def liht_pks(y, op, params, known_support, keep_iterates=False, engine="auto"):
    """LIHT with a preserved (partially known) support set."""
    return _solve(y, op, params, t0=known_support, model=None,
                  keep_iterates=keep_iterates, engine=engine)


def model_liht(y, op, params, model, keep_iterates=False, engine="auto"):
    """LIHT with a pluggable model projection in place of hard thresholding.

    Always runs the Python engine (projections are arbitrary callables)."""
    return _solve(y, op, params, t0=None, model=model,
                  keep_iterates=keep_iterates, engine=engine)


def _resolve_gamma(y, params):
    if params.weight_mode == "identity":
        return None, "unused"
    if params.gamma is None:
        est = estimate_gamma(y)
        return est.gamma, est.source
    if isinstance(params.gamma, LorentzianScale):
        return params.gamma.gamma, params.gamma.source
    return float(params.gamma), "user"


def _objective_fn(gamma):
    if gamma is None:
        return lambda r: float(r @ r)
    return lambda r: ll2_norm(r, gamma)


_STOP_NAMES = {0: "max-iters", 1: "converged", 2: "stalled"}


def _solve(y, op, params, t0, model, keep_iterates, engine):
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.m,):
        raise ValueError(f"measurement length {y.shape} != ({op.m},)")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurements must be finite")
    if params.s > op.n:
        raise ValueError(f"sparsity {params.s} exceeds dimension {op.n}")
    t0 = as_support([] if t0 is None else t0, op.n)
    if t0.size > params.s:
        raise ValueError(f"known support size {t0.size} exceeds sparsity {params.s}")
    if model is not None and t0.size:
        raise ValueError("model projection and known support are exclusive")

    gamma, gamma_source = _resolve_gamma(y, params)
    objective = _objective_fn(gamma)

    start = time.perf_counter()
    if params.s == 0:
        # degenerate target: the zero vector is the only feasible point
        obj0 = objective(y)
        return _assemble(np.zeros(op.n), [obj0], 0, "converged",
                         [np.empty(0, dtype=np.int64)], [], [], 0,
                         gamma, gamma_source,
                         np.zeros((1, op.n)) if keep_iterates else None,
                         time.perf_counter() - start)

    use_compiled = (backend.HAVE_COMPILED and isinstance(op, DenseOperator)
                    and model is None and engine != "python")
    if engine == "compiled" and not use_compiled:
        raise RuntimeError("compiled engine unavailable for this call")

    if use_compiled:
        out = backend._core.dense_solve(
            op.matrix, y, -1.0 if gamma is None else gamma, params.s, t0,
            params.step_mode == "adaptive", params.mu, params.max_iters,
            params.tol, params.backtrack_max, bool(keep_iterates))
        if out["stop_code"] == 3:
            raise DivergenceError(out["diverged_at"])
        supports = []
        pos = 0
        for size in out["support_sizes"]:
            supports.append(out["supports_flat"][pos:pos + size])
            pos += size
        return _assemble(out["x"], out["obj_trace"], out["iterations"],
                         _STOP_NAMES[out["stop_code"]], supports,
                         out["support_changed"].astype(bool),
                         out["backtracks_per_iter"], out["stall_events"],
                         gamma, gamma_source, out["iterates"],
                         time.perf_counter() - start)

    (x, trace, iterations, stop_reason, supports, changed_flags, bts,
     stall_events, iterates) = _solve_python(y, op, params, t0, model, gamma,
                                             objective, keep_iterates)
    return _assemble(x, trace, iterations, stop_reason, supports,
                     changed_flags, bts, stall_events, gamma, gamma_source,
                     iterates, time.perf_counter() - start)


def _solve_python(y, op, params, t0, model, gamma, objective, keep_iterates):
    n = op.n
    s = params.s
    lorentz = gamma is not None
    adaptive = params.step_mode == "adaptive"

    if model is not None:
        project = model.project
        proxy_kept = lambda grad: np.flatnonzero(model.project(grad))
    elif t0.size:
        project = lambda a: hard_threshold_pks(a, s, t0)
        proxy_kept = lambda grad: pks_kept_set(grad, s, t0)
    else:
        project = lambda a: hard_threshold(a, s)
        proxy_kept = lambda grad: top_magnitude_indices(np.abs(grad), s)

    x = np.zeros(n)
    r = y.copy()
    obj = objective(r)
    trace = [obj]
    cursupp = np.empty(0, dtype=np.int64)
    supports = [cursupp]
    changed_flags = []
    bts = []
    stall_events = 0
    iterates = [x.copy()] if keep_iterates else None
    iterations = 0
    stop_reason = "max-iters"

    for t in range(params.max_iters):
        if lorentz:
            w = lorentzian_weights(r, gamma)
            g = op.apply_adjoint(w * r)
        else:
            w = None
            g = op.apply_adjoint(r)
        gmax = float(np.max(np.abs(g)))
        if not np.isfinite(gmax):
            raise DivergenceError(t)

        if not adaptive:
            mu = params.mu
        elif gmax == 0.0:
            mu = 1.0
        else:
            num = float(g[cursupp] @ g[cursupp]) if cursupp.size else 0.0
            if cursupp.size and num > 0.0:
                sel = cursupp
            else:
                sel = proxy_kept(g)
                num = float(g[sel] @ g[sel]) if sel.size else 0.0
            if num == 0.0:
                mu = 1.0
            else:
                col = op.apply_columns(sel, g[sel])
                den = float(np.dot(w * col, col)) if lorentz else float(col @ col)
                if den < STALL_EPS:
                    stop_reason = "stalled"
                    break
                mu = num / den

        a = x + mu * g
        if not np.all(np.isfinite(a)):
            raise DivergenceError(t)
        cand = project(a)
        candsupp = np.flatnonzero(cand).astype(np.int64)
        cand_r = y - op.apply(cand)
        cand_obj = objective(cand_r)
        if np.isnan(cand_obj):
            cand_obj = np.inf

        bt = 0
        stalled_ls = False
        changed = not np.array_equal(cursupp, candsupp)
        if adaptive and changed and cand_obj > obj:
            best = (cand_obj, cand, cand_r, candsupp)
            while cand_obj > obj and bt < params.backtrack_max:
                mu *= 0.5
                bt += 1
                cand = project(x + mu * g)
                candsupp = np.flatnonzero(cand).astype(np.int64)
                cand_r = y - op.apply(cand)
                cand_obj = objective(cand_r)
                if np.isnan(cand_obj):
                    cand_obj = np.inf
                if cand_obj < best[0]:
                    best = (cand_obj, cand, cand_r, candsupp)
            if cand_obj > obj:
                cand_obj, cand, cand_r, candsupp = best
                stalled_ls = True
                stall_events += 1
            changed = not np.array_equal(cursupp, candsupp)

        dx = float(np.linalg.norm(cand - x))
        xn = float(np.linalg.norm(x))

        x, r, obj, cursupp = cand, cand_r, cand_obj, candsupp
        trace.append(obj)
        supports.append(cursupp)
        changed_flags.append(changed)
        bts.append(bt)
        if keep_iterates:
            iterates.append(x.copy())
        iterations = t + 1

        converged = dx <= params.tol * xn if xn > 0.0 else dx == 0.0
        if converged:
            stop_reason = "converged"
            break

    return (x, trace, iterations, stop_reason, supports, changed_flags, bts,
            stall_events,
            np.array(iterates) if keep_iterates else None)


def _assemble(x, trace, iterations, stop_reason, supports, changed, bts,
              stall_events, gamma, gamma_source, iterates=None, wall_time=0.0):
    return SolveReport(
        estimate=np.asarray(x, dtype=np.float64),
        objective_trace=np.asarray(trace, dtype=np.float64),
        iterations=int(iterations),
        stop_reason=stop_reason,
        backtracks=int(np.sum(bts)) if len(bts) else 0,
        support_trace_hash=support_digest(supports),
        wall_time=float(wall_time),
        gamma=np.nan if gamma is None else float(gamma),
        gamma_source=gamma_source,
        stall_events=int(stall_events),
        support_changed=np.asarray(changed, dtype=bool),
        backtracks_per_iter=np.asarray(bts, dtype=np.int64),
        supports=[np.asarray(s, dtype=np.int64) for s in supports],
        iterates=iterates,
    )
