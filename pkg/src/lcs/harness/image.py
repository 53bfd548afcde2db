"""Synthetic-image recovery experiment.

A piecewise-smooth test image (smooth gradients, flat shapes, a bright
ring, and multiscale texture) is reduced to its best s-term Haar
approximation; that exactly sparse target is measured with a partial
Hadamard ensemble, the measurements are corrupted, and recovery runs in
the Haar coefficient domain. The wavelet step lives here, composed around
the sensing operator, so the operator types stay basis-free.

Reconstructions are scored against the s-term approximation they are
trying to recover; the reported baseline row carries the approximation's
own R-SNR against the full image.
"""

import os

import numpy as np

from ..analysis import exact_recovery, rsnr
from ..noise import corrupt
from ..operators import partial_hadamard
from ..solvers import (SolverParams, clip_measurements, liht, liht_pks,
                       ls_iht, reject_measurements)
from ..thresholding import hard_threshold
from ..util import derive_seed, embed
from .runner import ReportRow
from .wavelets import approx_band_indices, haar2, ihaar2

DEFAULT_LEVELS = 2


def synthetic_image(side):
    """Deterministic piecewise-smooth grayscale test image.

    Smooth gradient background, flat rectangle and square, a dark disk, a
    bright ring, and a multiscale random texture (fixed internal seed) so
    the Haar spectrum decays like a natural image's rather than being
    trivially sparse.
    """
    if side < 8 or side & (side - 1):
        raise ValueError("side must be a power of two, at least 8")
    rng = np.random.default_rng(1234567)
    yy, xx = np.mgrid[0:side, 0:side] / float(side)
    img = 80.0 + 60.0 * xx + 25.0 * yy
    img[side // 8: side // 2, side // 2: side - side // 8] = 190.0
    img[(xx - 0.3) ** 2 + (yy - 0.65) ** 2 < 0.045] = 45.0
    img[int(0.70 * side): int(0.88 * side), int(0.08 * side): int(0.30 * side)] = 140.0
    ring = (xx - 0.5) ** 2 + (yy - 0.5) ** 2
    img[(ring > 0.16) & (ring < 0.21)] = 250.0
    # 1/f-style texture: smoothed random fields, octave by octave
    tex = np.zeros((side, side))
    size, amp = 4, 25.0
    while size <= side:
        up = rng.standard_normal((size, size))
        while up.shape[0] < side:
            nn = up.shape[0] * 2
            tmp = np.zeros((nn, nn))
            tmp[0::2, 0::2] = up
            tmp[1::2, 0::2] = up
            tmp[0::2, 1::2] = up
            tmp[1::2, 1::2] = up
            tmp = (tmp + np.roll(tmp, 1, 0) + np.roll(tmp, 1, 1)
                   + np.roll(np.roll(tmp, 1, 0), 1, 1)) / 4.0
            up = tmp
        tex += amp * up
        amp *= 0.7
        size *= 2
    return np.clip(img + tex, 0.0, 255.0) * 0.35


class _WaveletHadamardOperator:
    """Partial Hadamard measurement of an image expressed on its Haar
    coefficients: apply = measure(synthesize(c))."""

    kind = "wavelet-hadamard"

    def __init__(self, had, side, levels):
        self.had = had
        self.side = side
        self.levels = levels
        self.m = had.m
        self.n = had.n

    def apply(self, c):
        img = ihaar2(np.asarray(c, dtype=np.float64).reshape(self.side, self.side),
                     self.levels)
        return self.had.apply(img.ravel())

    def apply_adjoint(self, r):
        img = self.had.apply_adjoint(r).reshape(self.side, self.side)
        return haar2(img, self.levels).ravel()

    def apply_columns(self, support, coeffs):
        return self.apply(embed(coeffs, support, self.n))

    def restrict_rows(self, rows):
        return _WaveletHadamardOperator(self.had.restrict_rows(rows),
                                        self.side, self.levels)


DEFAULT_IMAGE_SOLVERS = (
    {"id": "liht", "variant": "liht"},
    {"id": "ls-iht", "variant": "ls_iht"},
    {"id": "clip-ls-iht", "variant": "ls_iht",
     "preprocess": {"kind": "clip", "lambda_factor": 1.0}},
    {"id": "reject-ls-iht", "variant": "ls_iht",
     "preprocess": {"kind": "reject", "lambda_factor": 0.5}},
)


def image_experiment(side=64, s=None, m=None, noise=None, solvers=None,
                     pks=False, levels=DEFAULT_LEVELS, seed=0,
                     max_iters=300, tol=1e-6):
    """Sparse-image recovery under corrupted partial Hadamard measurements.

    The ground truth is the best s-term Haar approximation of the
    synthetic test image. Clipping/rejection thresholds are factors of
    B = max |clean measurement|. Returns (rows, arrays): a ReportRow per
    solver (R-SNR against the s-term target) plus a best-s-term baseline
    row (its R-SNR against the full image), and the image-domain arrays.
    """
    n = side * side
    s = n // 8 if s is None else int(s)
    m = n // 2 if m is None else int(m)
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")

    image = synthetic_image(side)
    target_coeffs = hard_threshold(haar2(image, levels).ravel(), s)
    target_image = ihaar2(target_coeffs.reshape(side, side), levels)

    had = partial_hadamard(m, n, derive_seed(seed, 21))
    op = _WaveletHadamardOperator(had, side, levels)
    clean = op.apply(target_coeffs)
    if noise is None:
        from ..noise import NoiseSpec
        noise = NoiseSpec.cauchy(1.0)
    ms = corrupt(clean, noise.with_seed(derive_seed(seed, 22)))
    peak = float(np.max(np.abs(clean)))

    if solvers is None:
        solvers = [dict(d) for d in DEFAULT_IMAGE_SOLVERS]
        if pks:
            solvers.append({"id": "liht-pks", "variant": "liht_pks"})
    t0 = approx_band_indices(side, levels)

    params = SolverParams(s=s, max_iters=max_iters, tol=tol)
    rows = [ReportRow(sweep_value=float(m), solver_id="best-s-term",
                      mean_rsnr=rsnr(image.ravel(), target_image.ravel()),
                      median_rsnr=rsnr(image.ravel(), target_image.ravel()),
                      success_rate=1.0, mean_iterations=0.0,
                      mean_wall_time=0.0, trials=1)]
    arrays = {"original": image, "best-s-term": target_image}

    for solver in solvers:
        y_use, op_use = ms.y, op
        pre = solver.get("preprocess")
        if pre is not None:
            lam = pre["lambda_factor"] * peak
            if pre["kind"] == "clip":
                y_use = clip_measurements(y_use, lam)
            else:
                y_use, op_use = reject_measurements(y_use, op, lam)
        if solver["variant"] == "liht":
            report = liht(y_use, op_use, params)
        elif solver["variant"] == "ls_iht":
            report = ls_iht(y_use, op_use, params)
        elif solver["variant"] == "liht_pks":
            report = liht_pks(y_use, op_use, params, t0)
        else:
            raise ValueError(f"unsupported image solver {solver['variant']!r}")
        recon = ihaar2(report.estimate.reshape(side, side), levels)
        val = rsnr(target_image.ravel(), recon.ravel())
        rows.append(ReportRow(
            sweep_value=float(m), solver_id=solver["id"], mean_rsnr=val,
            median_rsnr=val,
            success_rate=float(exact_recovery(target_coeffs, report.estimate)),
            mean_iterations=float(report.iterations),
            mean_wall_time=report.wall_time, trials=1))
        arrays[solver["id"]] = recon
    return rows, arrays


def write_pgm(path, array):
    """Binary 8-bit PGM dump of a grayscale array (clipped to [0, 255])."""
    a = np.asarray(array, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("PGM output needs a 2-D array")
    data = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_image_outputs(rows, arrays, out_dir, name="image"):
    os.makedirs(out_dir, exist_ok=True)
    from .runner import rows_to_csv
    paths = []
    csv_path = os.path.join(out_dir, f"{name}.csv")
    with open(csv_path, "w") as fh:
        fh.write(rows_to_csv(rows))
    paths.append(csv_path)
    for key, arr in arrays.items():
        p = os.path.join(out_dir, f"{name}_{key}.pgm")
        write_pgm(p, arr)
        paths.append(p)
    return paths
