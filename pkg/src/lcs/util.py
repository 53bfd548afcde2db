"""Small shared helpers: seed derivation, support sets, digests."""

import hashlib

import numpy as np


def derive_seed(*parts):
    """Deterministic 64-bit seed from non-negative integer parts.

    Independent Monte-Carlo streams are obtained by hashing a base seed
    together with trial/stream indices, so permuting the execution order
    of trials never changes what any single trial draws.
    """
    parts = tuple(int(p) for p in parts)
    if not parts:
        raise ValueError("derive_seed needs at least one part")
    if any(p < 0 for p in parts):
        raise ValueError("seed parts must be non-negative")
    ss = np.random.SeedSequence(parts)
    return int(ss.generate_state(1, np.uint64)[0])


def as_support(indices, n):
    """Validate and canonicalize a support set: sorted int64, no duplicates,
    every index in [0, n)."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("support must be one-dimensional")
    if idx.size:
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError(f"support index out of range [0, {n})")
        if np.unique(idx).size != idx.size:
            raise ValueError("support contains duplicate indices")
    return np.sort(idx)


def embed(values, support, n):
    """Scatter `values` into a length-n zero vector at `support` positions."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (len(support),):
        raise ValueError("values/support length mismatch")
    out = np.zeros(n)
    out[support] = values
    return out


def support_digest(supports):
    """SHA-256 over a sequence of support arrays (length-prefixed)."""
    h = hashlib.sha256()
    for s in supports:
        a = np.ascontiguousarray(np.asarray(s, dtype=np.int64))
        h.update(np.int64(a.size).tobytes())
        h.update(a.tobytes())
    return h.hexdigest()
