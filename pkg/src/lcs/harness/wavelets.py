"""Separable orthonormal Haar transform for square images.

The analysis direction is the transpose of the synthesis direction, so
forward-then-inverse reproduces the input to machine precision and norms
are preserved; both facts are what the sparse image experiment relies on.
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def _analysis_step(block):
    """One Haar level on a square block: rows then columns."""
    even, odd = block[:, 0::2], block[:, 1::2]
    block = np.concatenate([(even + odd) / _SQRT2, (even - odd) / _SQRT2], axis=1)
    even, odd = block[0::2, :], block[1::2, :]
    return np.concatenate([(even + odd) / _SQRT2, (even - odd) / _SQRT2], axis=0)


def _synthesis_step(block):
    half = block.shape[0] // 2
    s, d = block[:half, :], block[half:, :]
    out = np.empty_like(block)
    out[0::2, :] = (s + d) / _SQRT2
    out[1::2, :] = (s - d) / _SQRT2
    block = out
    half = block.shape[1] // 2
    s, d = block[:, :half], block[:, half:]
    out = np.empty_like(block)
    out[:, 0::2] = (s + d) / _SQRT2
    out[:, 1::2] = (s - d) / _SQRT2
    return out


def _check(image, levels):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise ValueError("image must be square")
    side = image.shape[0]
    if side & (side - 1):
        raise ValueError("side must be a power of two")
    if not 1 <= levels <= int(np.log2(side)):
        raise ValueError(f"levels must lie in [1, {int(np.log2(side))}]")
    return image, side


def haar2(image, levels):
    """Forward (analysis) transform; approximation band lands top-left."""
    c, side = _check(image, levels)
    c = c.copy()
    size = side
    for _ in range(levels):
        c[:size, :size] = _analysis_step(c[:size, :size])
        size //= 2
    return c


def ihaar2(coeffs, levels):
    """Inverse (synthesis) transform."""
    c, side = _check(coeffs, levels)
    c = c.copy()
    for lvl in reversed(range(levels)):
        size = side >> lvl
        c[:size, :size] = _synthesis_step(c[:size, :size])
    return c


def approx_band_indices(side, levels):
    """Flattened (row-major) indices of the coarsest approximation band."""
    band = side >> levels
    rows, cols = np.mgrid[0:band, 0:band]
    return np.ravel_multi_index((rows.ravel(), cols.ravel()),
                                (side, side)).astype(np.int64)
