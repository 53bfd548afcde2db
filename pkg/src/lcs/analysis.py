"""Metrics, brute-force verification oracles, and recovery-bound evaluators."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .thresholding import hard_threshold

RSNR_CAP_DB = 300.0
RIP_CONDITION = 1.0 / math.sqrt(32.0)
_EXHAUSTIVE_LIMIT = 10 ** 6
_ORACLE_LIMIT = 10 ** 5
_CHUNK = 4096


def rsnr(x0, xhat):
    """Reconstruction SNR 20 log10(||x0|| / ||x0 - xhat||) in dB, capped at
    +300 dB when the error norm underflows."""
    x0 = np.asarray(x0, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x0.shape != xhat.shape:
        raise ValueError("length mismatch")
    ref = np.linalg.norm(x0)
    if ref == 0.0:
        raise ValueError("reference signal is zero")
    err = np.linalg.norm(x0 - xhat)
    if err == 0.0:
        return RSNR_CAP_DB
    return float(min(RSNR_CAP_DB, 20.0 * np.log10(ref / err)))


def exact_recovery(x0, xhat, tol=1e-4):
    """True iff ||x0 - xhat|| <= tol * ||x0|| (closed inequality)."""
    x0 = np.asarray(x0, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x0.shape != xhat.shape:
        raise ValueError("length mismatch")
    return bool(np.linalg.norm(x0 - xhat) <= tol * np.linalg.norm(x0))


@dataclass(frozen=True)
class RipEstimate:
    """Restricted isometry constant of one order.

    Exhaustive estimates cover every size-s support; sampled estimates are
    lower bounds over a seeded subset and are labeled as such."""

    s: int
    delta: float
    method: str  # "exhaustive" | "sampled"
    supports_checked: int

    def to_dict(self):
        return {"s": self.s, "delta": self.delta, "method": self.method,
                "supports_checked": self.supports_checked}


def _delta_over_supports(dense, supports):
    """Worst deviation max(1 - lambda_min, lambda_max - 1) of the Gram
    spectra over a batch of supports."""
    sub = dense[:, supports]            # (m, batch, s)
    sub = np.moveaxis(sub, 1, 0)        # (batch, m, s)
    gram = np.einsum("bms,bmt->bst", sub, sub)
    ev = np.linalg.eigvalsh(gram)
    return float(np.max(np.maximum(1.0 - ev[:, 0], ev[:, -1] - 1.0)))


def rip_constant(op, s, method="exhaustive", num_samples=1000, seed=0):
    """Restricted isometry constant delta_s of an operator.

    Exhaustive mode enumerates all C(n, s) supports (rejected above 10^6);
    sampled mode draws seeded random supports and therefore only lower
    bounds delta_s.
    """
    if not 1 <= s <= op.n:
        raise ValueError(f"order s={s} outside [1, {op.n}]")
    dense = op.materialize()
    n = op.n
    if method == "exhaustive":
        total = math.comb(n, s)
        if total > _EXHAUSTIVE_LIMIT:
            raise ValueError(f"C({n}, {s}) = {total} exceeds exhaustive limit")
        delta = 0.0
        combos = itertools.combinations(range(n), s)
        while True:
            chunk = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.intp)
            if chunk.size == 0:
                break
            delta = max(delta, _delta_over_supports(dense, chunk))
        return RipEstimate(s=s, delta=delta, method="exhaustive",
                           supports_checked=total)
    if method == "sampled":
        rng = np.random.default_rng(seed)
        seen = set()
        for _ in range(num_samples):
            seen.add(tuple(np.sort(rng.choice(n, size=s, replace=False))))
        supports = np.array(sorted(seen), dtype=np.intp)
        delta = 0.0
        for lo in range(0, len(supports), _CHUNK):
            delta = max(delta, _delta_over_supports(dense, supports[lo:lo + _CHUNK]))
        return RipEstimate(s=s, delta=delta, method="sampled",
                           supports_checked=len(supports))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class BoundReport:
    """Per-iteration reconstruction-error bound

        bound(t) = alpha^t ||x0|| + beta(t) * gamma * sqrt(m (e^eps - 1))

    with alpha = sqrt(8) delta_high and beta(t) = sqrt(1 + delta_low)
    (1 - alpha^t)/(1 - alpha). The guarantee is only claimed when
    delta_high < 1/sqrt(32) (condition_met)."""

    alpha: float
    beta: np.ndarray
    epsilon: float
    noise_level: float
    bound_at_t: np.ndarray
    condition_met: bool
    delta_high: float
    delta_low: float

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta.tolist(),
                "epsilon": self.epsilon, "noise_level": self.noise_level,
                "bound_at_t": self.bound_at_t.tolist(),
                "condition_met": self.condition_met,
                "delta_high": self.delta_high, "delta_low": self.delta_low}


def _rip_delta(rip):
    return rip.delta if isinstance(rip, RipEstimate) else float(rip)


def theorem_bound(rip_high, rip_low, gamma, epsilon, m, norm_x0, t_max):
    """Evaluate the sparse-recovery error bound for t = 0..t_max.

    rip_high is the estimate of order 3s - 2k, rip_low of order 2s - k
    (k = 0 recovers the plain no-prior statement). epsilon is the LL2 size
    of the noise; the implied l2 noise level is gamma sqrt(m (e^eps - 1)).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if isinstance(rip_high, RipEstimate) and isinstance(rip_low, RipEstimate):
        # orders must be realizable as (3s-2k, 2s-k) with 0 <= k <= s
        s = 2 * rip_low.s - rip_high.s
        k = 3 * rip_low.s - 2 * rip_high.s
        if s < 1 or k < 0 or k > s:
            raise ValueError(
                f"orders ({rip_high.s}, {rip_low.s}) are not (3s-2k, 2s-k)")
    d_high = _rip_delta(rip_high)
    d_low = _rip_delta(rip_low)
    alpha = math.sqrt(8.0) * d_high
    t = np.arange(t_max + 1)
    # geometric partial sums (1 - alpha^t)/(1 - alpha), valid at alpha = 1
    if alpha == 1.0:
        series = t.astype(np.float64)
    else:
        series = (1.0 - alpha ** t.astype(np.float64)) / (1.0 - alpha)
    beta = math.sqrt(1.0 + d_low) * series
    noise_level = gamma * math.sqrt(m * np.expm1(epsilon))
    bound = alpha ** t.astype(np.float64) * norm_x0 + beta * noise_level
    return BoundReport(alpha=alpha, beta=beta, epsilon=float(epsilon),
                       noise_level=float(noise_level), bound_at_t=bound,
                       condition_met=bool(d_high < RIP_CONDITION),
                       delta_high=d_high, delta_low=d_low)


def compressible_bound(deltas, gamma, epsilon, m, x0, s, t):
    """Error bound for compressible signals: the sparse bound plus the
    best-s-term tail penalty eta (||x0 - xs||_2 + ||x0 - xs||_1 / sqrt(s)).

    deltas maps RIP order -> delta (or RipEstimate) and must contain the
    orders s, 2s and 3s.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    d_s = _rip_delta(deltas[s])
    d_2s = _rip_delta(deltas[2 * s])
    d_3s = _rip_delta(deltas[3 * s])
    alpha = math.sqrt(8.0) * d_3s
    series = float(t) if alpha == 1.0 else (1.0 - alpha ** t) / (1.0 - alpha)
    beta = math.sqrt(1.0 + d_2s) * series
    xs = hard_threshold(x0, s)
    tail = x0 - xs
    eta = math.sqrt(1.0 + d_s)
    penalty = eta * (np.linalg.norm(tail) + np.linalg.norm(tail, 1) / math.sqrt(s))
    noise_level = gamma * math.sqrt(m * np.expm1(epsilon))
    return float(penalty + alpha ** t * np.linalg.norm(x0) + beta * noise_level)


def oracle_recover(y, op, s):
    """Exhaustive-support least-squares oracle.

    Searches every size-s support, solves the restricted least-squares
    problem, and returns the fit with the smallest l2 residual (first
    support in lexicographic order wins ties). Intended as an independent
    ground-truth reference for small instances.
    """
    y = np.asarray(y, dtype=np.float64)
    n = op.n
    if not 0 <= s <= n:
        raise ValueError(f"sparsity {s} outside [0, {n}]")
    if s == 0:
        return np.zeros(n)
    total = math.comb(n, s)
    if total > _ORACLE_LIMIT:
        raise ValueError(f"C({n}, {s}) = {total} exceeds oracle limit")
    dense = op.materialize()
    best_res = np.inf
    best = np.zeros(n)
    for combo in itertools.combinations(range(n), s):
        sub = dense[:, combo]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        res = float(np.linalg.norm(y - sub @ coef))
        if res < best_res - 1e-15 * max(1.0, best_res):
            best_res = res
            best = np.zeros(n)
            best[list(combo)] = coef
    return best


def objective_violations(report, rel_slack=1e-10):
    """Count monotonicity violations in a solve report.

    Checks every consecutive iteration pair with unchanged support and no
    backtracking: the objective must not increase beyond
    rel_slack * (1 + |objective|)."""
    trace = report.objective_trace
    violations = 0
    for t in range(report.iterations):
        if report.support_changed[t] or report.backtracks_per_iter[t]:
            continue
        allowed = trace[t] + rel_slack * (1.0 + abs(trace[t]))
        if trace[t + 1] > allowed:
            violations += 1
    return violations
