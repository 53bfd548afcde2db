"""Backend selection for the hot kernels.

The package ships a compiled extension (`lcs._core`) holding the fast
Walsh-Hadamard butterfly and the dense solver loop. When the extension is
missing (source checkout without a build step) everything transparently
falls back to the NumPy implementations. `benchmarks/bench_backends.py`
compares the two.
"""

import numpy as np

try:
    from . import _core
except ImportError:  # pure-Python install
    _core = None

HAVE_COMPILED = _core is not None
BACKEND = "compiled" if HAVE_COMPILED else "python"


def fwht_python(x):
    """Walsh-Hadamard transform (Sylvester order, unnormalized).

    Levels run in ascending butterfly distance, matching the compiled
    kernel; since every butterfly is a single add/sub pair, the two
    backends produce bit-identical output.
    """
    v = np.array(x, dtype=np.float64, copy=True)
    n = v.size
    if n == 0 or n & (n - 1):
        raise ValueError("length must be a positive power of two")
    h = 1
    while h < n:
        w = v.reshape(-1, 2, h)
        top = w[:, 0, :] + w[:, 1, :]
        bot = w[:, 0, :] - w[:, 1, :]
        w[:, 0, :] = top
        w[:, 1, :] = bot
        h *= 2
    return v


def fwht_compiled(x):
    """Compiled in-place butterfly on a fresh copy of x."""
    buf = np.array(x, dtype=np.float64, copy=True)
    _core.fwht(buf)
    return buf


if HAVE_COMPILED:
    fwht = fwht_compiled
else:
    fwht = fwht_python
