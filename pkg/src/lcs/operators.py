"""Sensing operators and measurement containers.

Two concrete operator families are provided: dense Gaussian ensembles and
fast partial Hadamard ensembles (selected rows of the Walsh-Hadamard
transform with a random sign flip per column). Both expose the same
surface: forward/adjoint application, column-restricted application, row
and column restriction, dense materialization, and a JSON descriptor that
regenerates seed-built operators without storing payloads.

All operators are immutable after construction and safe to share.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .util import as_support, embed


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


class SensingOperator:
    """Common interface; see DenseOperator and PartialHadamardOperator."""

    kind = None
    m = None
    n = None

    def apply(self, x):
        raise NotImplementedError

    def apply_adjoint(self, r):
        raise NotImplementedError

    def apply_columns(self, support, coeffs):
        """Apply the operator restricted to `support` columns, i.e.
        Phi_S @ coeffs, without building the restricted operator."""
        raise NotImplementedError

    def restrict_columns(self, support):
        raise NotImplementedError

    def restrict_rows(self, rows):
        raise NotImplementedError

    def materialize(self):
        """Dense (m, n) array equal to the operator. O(m*n) memory."""
        raise NotImplementedError

    def descriptor(self):
        """JSON-serializable descriptor; only seed-built operators have one."""
        raise NotImplementedError

    def _check_signal(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"signal length {x.shape} != ({self.n},)")
        return x

    def _check_measurement(self, r):
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (self.m,):
            raise ValueError(f"measurement length {r.shape} != ({self.m},)")
        return r


class DenseOperator(SensingOperator):
    """Explicit dense matrix operator."""

    kind = "dense"

    def __init__(self, matrix, _descriptor=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        self.matrix = _freeze(matrix)
        self.m, self.n = matrix.shape
        self._descriptor = _descriptor

    def apply(self, x):
        return self.matrix @ self._check_signal(x)

    def apply_adjoint(self, r):
        return self.matrix.T @ self._check_measurement(r)

    def apply_columns(self, support, coeffs):
        support = as_support(support, self.n)
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return self.matrix[:, support] @ coeffs

    def restrict_columns(self, support):
        support = as_support(support, self.n)
        return DenseOperator(self.matrix[:, support])

    def restrict_rows(self, rows):
        rows = as_support(rows, self.m)
        return DenseOperator(self.matrix[rows, :])

    def materialize(self):
        return np.array(self.matrix)

    def descriptor(self):
        if self._descriptor is None:
            raise ValueError("ad-hoc dense operators have no descriptor")
        return dict(self._descriptor)


class PartialHadamardOperator(SensingOperator):
    """m selected rows of the n x n Walsh-Hadamard transform composed with
    a random sign flip per column, scaled by 1/sqrt(n). Forward and adjoint
    cost O(n log n)."""

    kind = "partial-hadamard"

    def __init__(self, n, rows, signs, seed=None):
        if n < 1 or n & (n - 1):
            raise ValueError("n must be a power of two")
        rows = as_support(rows, n)
        signs = np.asarray(signs, dtype=np.float64)
        if signs.shape != (n,) or not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be a length-n vector of +-1")
        self.n = int(n)
        self.m = int(rows.size)
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        rows.setflags(write=False)
        self.rows = rows
        self.signs = _freeze(signs)
        self.seed = seed
        self._scale = 1.0 / np.sqrt(self.n)

    def apply(self, x):
        x = self._check_signal(x)
        t = backend.fwht(self.signs * x)
        return t[self.rows] * self._scale

    def apply_adjoint(self, r):
        r = self._check_measurement(r)
        e = np.zeros(self.n)
        e[self.rows] = r
        return self.signs * backend.fwht(e) * self._scale

    def apply_columns(self, support, coeffs):
        support = as_support(support, self.n)
        v = np.zeros(self.n)
        v[support] = self.signs[support] * np.asarray(coeffs, dtype=np.float64)
        return backend.fwht(v)[self.rows] * self._scale

    def restrict_columns(self, support):
        return RestrictedColumnsOperator(self, as_support(support, self.n))

    def restrict_rows(self, rows):
        rows = as_support(rows, self.m)
        return PartialHadamardOperator(self.n, self.rows[rows], self.signs)

    def materialize(self):
        h = np.array([[1.0]])
        while h.shape[0] < self.n:
            h = np.block([[h, h], [h, -h]])
        return h[self.rows] * self.signs * self._scale

    def descriptor(self):
        if self.seed is None:
            raise ValueError("row-restricted Hadamard operators have no descriptor")
        return {"kind": self.kind, "m": self.m, "n": self.n, "seed": self.seed}


class RestrictedColumnsOperator(SensingOperator):
    """Column restriction of a parent operator; applying it equals applying
    the parent to the zero-embedded coefficient vector."""

    kind = "restricted-columns"

    def __init__(self, parent, support):
        self.parent = parent
        self.support = as_support(support, parent.n)
        self.m = parent.m
        self.n = int(self.support.size)

    def apply(self, x):
        x = self._check_signal(x)
        return self.parent.apply_columns(self.support, x)

    def apply_adjoint(self, r):
        return self.parent.apply_adjoint(r)[self.support]

    def apply_columns(self, support, coeffs):
        support = as_support(support, self.n)
        return self.parent.apply_columns(self.support[support], coeffs)

    def restrict_columns(self, support):
        support = as_support(support, self.n)
        return RestrictedColumnsOperator(self.parent, self.support[support])

    def restrict_rows(self, rows):
        return RestrictedColumnsOperator(self.parent.restrict_rows(rows), self.support)

    def materialize(self):
        return self.parent.materialize()[:, self.support]

    def descriptor(self):
        raise ValueError("restricted operators have no descriptor")


def spectral_norm_estimate(op, seed=0, iters=100, rtol=1e-9):
    """Largest singular value via power iteration on Phi^T Phi.

    Runs `iters` rounds or until the relative change drops below `rtol`,
    whichever comes first. Deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = op.apply_adjoint(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_est = np.sqrt(nw)
        if est > 0 and abs(new_est - est) <= rtol * est:
            est = new_est
            break
        est = new_est
        v = w / nw
    return float(est)


def gaussian_ensemble(m, n, seed, normalization="unit-columns"):
    """Dense i.i.d. standard-normal ensemble.

    unit-columns scales each column to unit l2 norm; spectral additionally
    divides by a power-iteration estimate of the largest singular value so
    the operator norm is at most 1 (the contraction condition of the
    recovery guarantees). Same seed gives the same operator byte-for-byte.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if normalization not in ("unit-columns", "spectral"):
        raise ValueError(f"unknown normalization {normalization!r}")
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((m, n))
    mat /= np.linalg.norm(mat, axis=0, keepdims=True)
    desc = {"kind": "dense", "m": int(m), "n": int(n), "seed": int(seed),
            "normalization": normalization}
    if normalization == "spectral":
        probe = DenseOperator(mat)
        sigma = spectral_norm_estimate(probe, seed=seed)
        mat = mat / sigma
    return DenseOperator(mat, _descriptor=desc)


def partial_hadamard(m, n, seed):
    """Seeded partial Hadamard ensemble.

    Rows are drawn uniformly without replacement; the all-ones row 0 is
    excluded whenever m < n so no measurement is DC-dominated. m = n keeps
    every row and the operator is orthonormal.
    """
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of two")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    rng = np.random.default_rng(seed)
    if m == n:
        rows = np.arange(n)
    else:
        rows = np.sort(rng.choice(np.arange(1, n), size=m, replace=False))
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return PartialHadamardOperator(n, rows, signs, seed=int(seed))


def from_descriptor(desc):
    """Rebuild a seed-constructed operator from its JSON descriptor."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind == "dense":
        expected = {"m", "n", "seed", "normalization"}
        if set(desc) != expected:
            raise ValueError(f"dense descriptor keys must be {sorted(expected)}")
        return gaussian_ensemble(desc["m"], desc["n"], desc["seed"],
                                 desc["normalization"])
    if kind == "partial-hadamard":
        expected = {"m", "n", "seed"}
        if set(desc) != expected:
            raise ValueError(f"hadamard descriptor keys must be {sorted(expected)}")
        return partial_hadamard(desc["m"], desc["n"], desc["seed"])
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True)
class MeasurementSet:
    """Measurement vector with optional ground truth and noise components.

    When both optional parts are present, y == clean + noise must hold
    exactly (the container is built that way by noise.corrupt)."""

    y: np.ndarray
    clean: np.ndarray = None
    noise: np.ndarray = None

    def __post_init__(self):
        y = _freeze(self.y)
        object.__setattr__(self, "y", y)
        for name in ("clean", "noise"):
            v = getattr(self, name)
            if v is not None:
                v = _freeze(v)
                if v.shape != y.shape:
                    raise ValueError(f"{name} length differs from y")
                object.__setattr__(self, name, v)
        if self.clean is not None and self.noise is not None:
            if not np.array_equal(self.y, self.clean + self.noise):
                raise ValueError("y must equal clean + noise exactly")

    @property
    def m(self):
        return self.y.size
