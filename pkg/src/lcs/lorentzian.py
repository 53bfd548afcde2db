"""Lorentzian (LL2) residual metric, diagonal weights, gradient, and the
quantile-based scale estimate.

The LL2 metric sum(log(1 + u_i^2 / gamma^2)) grows quadratically for small
residuals and only logarithmically for large ones, which is what makes the
solvers in this package robust to gross measurement outliers.
"""

from dataclasses import dataclass

import numpy as np

GAMMA_FLOOR_REL = 1e-9


@dataclass(frozen=True)
class LorentzianScale:
    """Scale parameter of the LL2 metric plus its provenance."""

    gamma: float
    source: str  # "user" | "estimated"

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ValueError("gamma must be positive and finite")
        if self.source not in ("user", "estimated"):
            raise ValueError(f"unknown gamma source {self.source!r}")


def gamma_floor(y):
    """Lower clamp for estimated scales; keeps the weights well defined even
    for a constant measurement vector."""
    y = np.asarray(y, dtype=np.float64)
    peak = float(np.max(np.abs(y))) if y.size else 0.0
    return GAMMA_FLOOR_REL * max(1.0, peak)


def ll2_norm(u, gamma):
    """sum_i log(1 + u_i^2 / gamma^2). Zero iff u == 0."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    u = np.asarray(u, dtype=np.float64)
    return float(np.log1p((u / gamma) ** 2).sum())


def weights(residual, gamma):
    """Diagonal reweighting terms gamma^2 / (gamma^2 + r_i^2), in (0, 1]."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    r = np.asarray(residual, dtype=np.float64)
    g2 = gamma * gamma
    return g2 / (g2 + r * r)


def negative_gradient(op, y, x, gamma):
    """Negative gradient direction Phi^T W (y - Phi x) of the LL2 objective.

    The constant 2/gamma^2 of the exact analytic gradient is dropped; step
    sizes absorb any scaling.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y.shape != (op.m,) or x.shape != (op.n,):
        raise ValueError("dimension mismatch")
    r = y - op.apply(x)
    return op.apply_adjoint(weights(r, gamma) * r)


def quantile(v, q):
    """Order-statistic quantile with linear interpolation at index q*(m-1).

    q = 0 gives the minimum and q = 1 the maximum, so (q1 - q0)/2 is half
    the sample range.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("quantile of empty vector")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return float(np.quantile(v, q, method="linear"))


def estimate_gamma(y):
    """Scale estimate (y_(0.875) - y_(0.125)) / 2, clamped away from zero.

    The inter-quantile half-range tolerates up to 25% of the measurements
    being corrupted by outliers.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("cannot estimate gamma from empty measurements")
    spread = (quantile(y, 0.875) - quantile(y, 0.125)) / 2.0
    return LorentzianScale(max(gamma_floor(y), spread), "estimated")


def gamma_from_clean_range(clean):
    """Half the sample range of the clean measurements.

    Experimental mode for studies where the uncorrupted measurements are
    known; no optimality is claimed.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if clean.size == 0:
        raise ValueError("empty measurement vector")
    spread = (quantile(clean, 1.0) - quantile(clean, 0.0)) / 2.0
    return LorentzianScale(max(gamma_floor(clean), spread), "estimated")
