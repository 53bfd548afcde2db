"""Heavy-tailed and contaminated sampling-noise generators.

Symmetric alpha-stable draws use the Chambers-Mallows-Stuck construction,
which is exact for the whole family including the Cauchy case alpha = 1.
The scale convention is the stable scale parameter sigma, so alpha = 2
yields a Gaussian with variance 2 sigma^2.
"""

from dataclasses import dataclass, replace

import numpy as np

from .operators import MeasurementSet

LAWS = ("alpha-stable", "p-gaussian", "cauchy", "none")


@dataclass(frozen=True)
class NoiseSpec:
    """Tagged description of a sampling-noise law plus its seed."""

    law: str
    alpha: float = None
    sigma: float = None
    variance: float = None
    p: float = None
    delta: float = None
    seed: int = 0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown noise law {self.law!r}")
        if self.law == "alpha-stable":
            if self.alpha is None or not 0.0 < self.alpha <= 2.0:
                raise ValueError("alpha must lie in (0, 2]")
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("sigma must be positive")
        elif self.law == "cauchy":
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("sigma must be positive")
        elif self.law == "p-gaussian":
            if self.variance is None or self.variance <= 0:
                raise ValueError("variance must be positive")
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("p must lie in [0, 1]")
            if self.delta is None or self.delta <= 0:
                raise ValueError("delta must be positive")

    @classmethod
    def alpha_stable(cls, alpha, sigma, seed=0):
        return cls(law="alpha-stable", alpha=alpha, sigma=sigma, seed=seed)

    @classmethod
    def p_gaussian(cls, variance, p, delta, seed=0):
        return cls(law="p-gaussian", variance=variance, p=p, delta=delta, seed=seed)

    @classmethod
    def cauchy(cls, sigma, seed=0):
        return cls(law="cauchy", sigma=sigma, seed=seed)

    @classmethod
    def none(cls, seed=0):
        return cls(law="none", seed=seed)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        out = {"law": self.law, "seed": self.seed}
        for name in ("alpha", "sigma", "variance", "p", "delta"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        allowed = {"law", "alpha", "sigma", "variance", "p", "delta", "seed"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown noise keys {sorted(unknown)}")
        return cls(**d)


def _stable_standard(rng, alpha, m):
    """Standard symmetric alpha-stable draws (CMS construction)."""
    u = rng.uniform(-np.pi / 2, np.pi / 2, m)
    e = rng.standard_exponential(m)
    if alpha == 1.0:
        return np.tan(u)
    return (np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha))


def sample(spec, m):
    """Draw a length-m noise vector. Deterministic given spec.seed."""
    if m < 1:
        raise ValueError("m must be positive")
    rng = np.random.default_rng(spec.seed)
    if spec.law == "none":
        return np.zeros(m)
    if spec.law == "alpha-stable":
        return spec.sigma * _stable_standard(rng, spec.alpha, m)
    if spec.law == "cauchy":
        return spec.sigma * _stable_standard(rng, 1.0, m)
    # contaminated p-Gaussian: Gaussian background plus, with probability p
    # per coordinate, an added gross term of magnitude delta and random sign
    g = rng.normal(0.0, np.sqrt(spec.variance), m)
    hit = rng.random(m) < spec.p
    signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    return g + hit * signs * spec.delta


def corrupt(clean, spec):
    """Additively corrupt clean measurements; keeps all three components."""
    clean = np.asarray(clean, dtype=np.float64)
    z = sample(spec, clean.size)
    return MeasurementSet(y=clean + z, clean=clean, noise=z)
