"""Hard-thresholding operators and model-based projections.

All selections are deterministic: magnitude decides, and exact magnitude
ties are broken in favour of the lowest index. Selection uses partial
partitioning (average O(n)) rather than a full sort.
"""

import numpy as np

from .util import as_support


def top_magnitude_indices(mag, k):
    """Indices (ascending) of the k largest entries of a non-negative vector.

    Ties at the selection boundary are resolved by lowest index, which makes
    every projector in this module a deterministic function of its input.
    """
    mag = np.asarray(mag)
    n = mag.size
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k >= n:
        return np.arange(n, dtype=np.int64)
    # value of the k-th largest entry, found by partial partitioning
    thresh = np.partition(mag, n - k)[n - k]
    greater = np.flatnonzero(mag > thresh)
    need = k - greater.size
    ties = np.flatnonzero(mag == thresh)[:need]
    return np.sort(np.concatenate([greater, ties])).astype(np.int64)


def hard_threshold(a, s):
    """Best s-term approximation: keep the s largest-magnitude entries.

    Kept entries pass through unchanged; everything else is set to zero.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.size
    if s < 0 or s > n:
        raise ValueError(f"sparsity s={s} outside [0, {n}]")
    keep = top_magnitude_indices(np.abs(a), s)
    out = np.zeros_like(a)
    out[keep] = a[keep]
    return out


def hard_threshold_pks(a, s, known_support):
    """Thresholding with a preserved index set.

    Entries indexed by `known_support` pass through unchanged (zeros
    included); of the remaining entries, exactly the s - |known_support|
    largest magnitudes are kept.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.size
    t0 = as_support(known_support, n)
    k = t0.size
    if k > s:
        raise ValueError(f"known support size {k} exceeds sparsity {s}")
    if s > n:
        raise ValueError(f"sparsity s={s} outside [0, {n}]")
    if k == 0:
        return hard_threshold(a, s)
    mag = np.abs(a)
    mag[t0] = -1.0  # exclude from selection; preserved unconditionally
    keep = top_magnitude_indices(mag, s - k)
    out = np.zeros_like(a)
    out[t0] = a[t0]
    out[keep] = a[keep]
    return out


def pks_kept_set(a, s, known_support):
    """Index set (ascending) that hard_threshold_pks keeps for input `a`."""
    a = np.asarray(a, dtype=np.float64)
    t0 = as_support(known_support, a.size)
    if t0.size == 0:
        return top_magnitude_indices(np.abs(a), s)
    mag = np.abs(a)
    mag[t0] = -1.0
    sel = top_magnitude_indices(mag, s - t0.size)
    return np.sort(np.concatenate([t0, sel]))


class SparsityModel:
    """Plain s-sparsity expressed as a model projection."""

    def __init__(self, s):
        if s < 0:
            raise ValueError("sparsity must be non-negative")
        self.s = int(s)

    def project(self, a):
        return hard_threshold(a, self.s)


class BlockSparsityModel:
    """Block-sparse model: n splits into equal contiguous blocks and the
    projection keeps the `keep_blocks` blocks of largest l2 energy.

    This is the reference union-of-subspaces projector; the projection is
    exact (it minimizes the l2 distance over the model set) because block
    energies are separable.
    """

    def __init__(self, block_size, keep_blocks):
        if block_size < 1 or keep_blocks < 0:
            raise ValueError("invalid block model parameters")
        self.block_size = int(block_size)
        self.keep_blocks = int(keep_blocks)

    def project(self, a):
        a = np.asarray(a, dtype=np.float64)
        n = a.size
        if n % self.block_size:
            raise ValueError(f"length {n} not divisible by block size {self.block_size}")
        nblocks = n // self.block_size
        if self.keep_blocks >= nblocks:
            return a.copy()
        energy = (a.reshape(nblocks, self.block_size) ** 2).sum(axis=1)
        keep = top_magnitude_indices(energy, self.keep_blocks)
        out = np.zeros_like(a)
        for b in keep:
            lo = b * self.block_size
            out[lo:lo + self.block_size] = a[lo:lo + self.block_size]
        return out


def project_model(a, model):
    """Apply a model projection (delegates to the model object)."""
    return model.project(a)
