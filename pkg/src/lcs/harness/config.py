"""Experiment configuration: a strict, path-reporting JSON validator.

Unknown keys are rejected everywhere; every complaint carries the path of
the offending entry so config errors are actionable from the CLI.
"""

import json
from dataclasses import dataclass, field

SWEEP_AXES = ("p", "alpha", "m", "known-support-fraction")
SOLVER_VARIANTS = ("liht", "ls_iht", "liht_pks", "model_liht")
POLICIES = ("largest", "smallest", "first-band")
NOISE_LAWS = ("alpha-stable", "p-gaussian", "cauchy", "none")


class ConfigError(ValueError):
    """Carries a list of 'path: message' strings."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(self.problems))


class _Check:
    def __init__(self):
        self.problems = []

    def fail(self, path, msg):
        self.problems.append(f"{path}: {msg}")

    def expect_keys(self, d, path, required, optional=()):
        unknown = set(d) - set(required) - set(optional)
        for key in sorted(unknown):
            self.fail(f"{path}.{key}" if path else key, "unknown key")
        missing = set(required) - set(d)
        for key in sorted(missing):
            self.fail(f"{path}.{key}" if path else key, "missing required key")
        return not unknown and not missing

    def typed(self, d, path, key, types, pred=None, msg=""):
        if key not in d:
            return None
        v = d[key]
        tt = types if isinstance(types, tuple) else (types,)
        if not isinstance(v, tt) or (isinstance(v, bool) and bool not in tt):
            self.fail(f"{path}.{key}" if path else key,
                      f"expected {'/'.join(t.__name__ for t in tt)}, "
                      f"got {type(v).__name__}")
            return None
        if pred is not None and not pred(v):
            self.fail(f"{path}.{key}" if path else key, msg or "invalid value")
            return None
        return v


@dataclass(frozen=True)
class SignalSpec:
    n: int
    s: int
    amplitude: float = 1.0
    sign: str = "rademacher"
    support: str = "uniform-random"


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    m: int
    normalization: str = "unit-columns"


@dataclass(frozen=True)
class SolverSpec:
    id: str
    variant: str
    params: dict = field(default_factory=dict)
    t0_policy: dict = None
    preprocess: dict = None
    model: dict = None
    fatal: bool = False


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    signal: SignalSpec
    operator: OperatorSpec
    noise: dict
    solvers: tuple
    trials: int
    base_seed: int
    sweep: SweepSpec = None
    pin_operator: bool = False
    success_tol: float = 1e-4

    @classmethod
    def from_dict(cls, d):
        c = _Check()
        ok = c.expect_keys(
            d, "", required=("name", "signal", "operator", "noise", "solvers",
                             "trials", "base_seed"),
            optional=("sweep", "pin_operator", "success_tol"))
        if not ok:
            raise ConfigError(c.problems)

        name = c.typed(d, "", "name", str, lambda v: len(v) > 0, "must be nonempty")
        trials = c.typed(d, "", "trials", int, lambda v: v >= 1, "must be >= 1")
        base_seed = c.typed(d, "", "base_seed", int, lambda v: v >= 0,
                            "must be non-negative")
        pin_operator = bool(d.get("pin_operator", False))
        success_tol = float(d.get("success_tol", 1e-4))

        signal = _parse_signal(d.get("signal"), c)
        operator = _parse_operator(d.get("operator"), c, signal)
        noise = _parse_noise(d.get("noise"), c, "noise")
        solvers = _parse_solvers(d.get("solvers"), c, signal)
        sweep = _parse_sweep(d.get("sweep"), c, signal, noise, solvers)

        if c.problems:
            raise ConfigError(c.problems)
        return cls(name=name, signal=signal, operator=operator, noise=noise,
                   solvers=solvers, trials=trials, base_seed=base_seed,
                   sweep=sweep, pin_operator=pin_operator,
                   success_tol=success_tol)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([f"<json>: {e}"])
        if not isinstance(d, dict):
            raise ConfigError(["<json>: top level must be an object"])
        return cls.from_dict(d)

    def to_dict(self):
        out = {
            "name": self.name,
            "signal": vars(self.signal).copy(),
            "operator": vars(self.operator).copy(),
            "noise": dict(self.noise),
            "solvers": [_solver_dict(s) for s in self.solvers],
            "trials": self.trials,
            "base_seed": self.base_seed,
            "pin_operator": self.pin_operator,
            "success_tol": self.success_tol,
        }
        if self.sweep is not None:
            out["sweep"] = {"axis": self.sweep.axis,
                            "values": list(self.sweep.values)}
        return out


def _solver_dict(s):
    out = {"id": s.id, "variant": s.variant, "params": dict(s.params),
           "fatal": s.fatal}
    for key in ("t0_policy", "preprocess", "model"):
        v = getattr(s, key)
        if v is not None:
            out[key] = dict(v)
    return out


def _parse_signal(d, c):
    if not isinstance(d, dict):
        c.fail("signal", "must be an object")
        return None
    if not c.expect_keys(d, "signal", required=("n", "s"),
                         optional=("amplitude", "sign", "support")):
        return None
    n = c.typed(d, "signal", "n", int, lambda v: v >= 1, "must be >= 1")
    s = c.typed(d, "signal", "s", int, lambda v: v >= 0, "must be >= 0")
    amplitude = c.typed(d, "signal", "amplitude", (int, float),
                        lambda v: v > 0, "must be positive")
    sign = c.typed(d, "signal", "sign", str, lambda v: v == "rademacher",
                   "only 'rademacher' is supported")
    support = c.typed(d, "signal", "support", str,
                      lambda v: v == "uniform-random",
                      "only 'uniform-random' is supported")
    if n is not None and s is not None and s > n:
        c.fail("signal.s", f"sparsity {s} exceeds n={n}")
    if c.problems:
        return None
    return SignalSpec(n=n, s=s,
                      amplitude=float(amplitude) if amplitude is not None else 1.0,
                      sign=sign or "rademacher",
                      support=support or "uniform-random")


def _parse_operator(d, c, signal):
    if not isinstance(d, dict):
        c.fail("operator", "must be an object")
        return None
    kind = d.get("kind")
    if kind == "dense":
        if not c.expect_keys(d, "operator", required=("kind", "m"),
                             optional=("normalization",)):
            return None
        norm = c.typed(d, "operator", "normalization", str,
                       lambda v: v in ("unit-columns", "spectral"),
                       "must be 'unit-columns' or 'spectral'")
    elif kind == "partial-hadamard":
        if not c.expect_keys(d, "operator", required=("kind", "m")):
            return None
        norm = None
        if signal is not None and signal.n & (signal.n - 1):
            c.fail("operator.kind", "partial-hadamard needs n a power of two")
    else:
        c.fail("operator.kind", f"unknown kind {kind!r}")
        return None
    m = c.typed(d, "operator", "m", int, lambda v: v >= 1, "must be >= 1")
    if m is not None and signal is not None and m > signal.n:
        c.fail("operator.m", f"m={m} exceeds n={signal.n}")
    if c.problems:
        return None
    return OperatorSpec(kind=kind, m=m, normalization=norm or "unit-columns")


def _parse_noise(d, c, path):
    if not isinstance(d, dict):
        c.fail(path, "must be an object")
        return None
    law = d.get("law")
    if law not in NOISE_LAWS:
        c.fail(f"{path}.law", f"unknown law {law!r}")
        return None
    required = {"alpha-stable": ("law", "alpha", "sigma"),
                "p-gaussian": ("law", "variance", "p", "delta"),
                "cauchy": ("law", "sigma"),
                "none": ("law",)}[law]
    if not c.expect_keys(d, path, required=required):
        return None
    doms = {"alpha": lambda v: 0 < v <= 2, "sigma": lambda v: v > 0,
            "variance": lambda v: v > 0, "p": lambda v: 0 <= v <= 1,
            "delta": lambda v: v > 0}
    out = {"law": law}
    for key in required[1:]:
        v = c.typed(d, path, key, (int, float), doms[key], "outside domain")
        if v is not None:
            out[key] = float(v)
    return out if not c.problems else None


_PARAM_KEYS = ("s", "gamma", "step_mode", "mu", "max_iters", "tol",
               "backtrack_max", "weight_mode")


def _parse_solvers(lst, c, signal):
    if not isinstance(lst, list) or not lst:
        c.fail("solvers", "must be a nonempty list")
        return None
    out = []
    seen_ids = set()
    for i, d in enumerate(lst):
        path = f"solvers[{i}]"
        if not isinstance(d, dict):
            c.fail(path, "must be an object")
            continue
        if not c.expect_keys(d, path, required=("id", "variant"),
                             optional=("params", "t0_policy", "preprocess",
                                       "model", "fatal")):
            continue
        sid = c.typed(d, path, "id", str, lambda v: len(v) > 0, "must be nonempty")
        if sid in seen_ids:
            c.fail(f"{path}.id", f"duplicate solver id {sid!r}")
        seen_ids.add(sid)
        variant = c.typed(d, path, "variant", str,
                          lambda v: v in SOLVER_VARIANTS,
                          f"must be one of {SOLVER_VARIANTS}")
        params = d.get("params", {})
        if not isinstance(params, dict):
            c.fail(f"{path}.params", "must be an object")
            params = {}
        else:
            for key in sorted(set(params) - set(_PARAM_KEYS)):
                c.fail(f"{path}.params.{key}", "unknown key")
            gamma = params.get("gamma")
            if gamma is not None and not (
                    gamma in ("auto", "clean-range")
                    or isinstance(gamma, (int, float)) and gamma > 0):
                c.fail(f"{path}.params.gamma",
                       "must be 'auto', 'clean-range', or a positive number")
        t0_policy = d.get("t0_policy")
        if variant == "liht_pks":
            if not isinstance(t0_policy, dict):
                c.fail(f"{path}.t0_policy", "required for liht_pks")
            else:
                c.expect_keys(t0_policy, f"{path}.t0_policy",
                              required=("policy", "fraction"))
                c.typed(t0_policy, f"{path}.t0_policy", "policy", str,
                        lambda v: v in POLICIES, f"must be one of {POLICIES}")
                c.typed(t0_policy, f"{path}.t0_policy", "fraction",
                        (int, float), lambda v: 0 <= v <= 1, "must be in [0, 1]")
        elif t0_policy is not None:
            c.fail(f"{path}.t0_policy", "only valid for liht_pks")
        model = d.get("model")
        if variant == "model_liht":
            if not isinstance(model, dict):
                c.fail(f"{path}.model", "required for model_liht")
            else:
                c.expect_keys(model, f"{path}.model",
                              required=("block_size", "keep_blocks"))
                c.typed(model, f"{path}.model", "block_size", int,
                        lambda v: v >= 1, "must be >= 1")
                c.typed(model, f"{path}.model", "keep_blocks", int,
                        lambda v: v >= 0, "must be >= 0")
        elif model is not None:
            c.fail(f"{path}.model", "only valid for model_liht")
        preprocess = d.get("preprocess")
        if preprocess is not None:
            if not isinstance(preprocess, dict):
                c.fail(f"{path}.preprocess", "must be an object")
            else:
                c.expect_keys(preprocess, f"{path}.preprocess",
                              required=("kind", "lambda_factor"))
                c.typed(preprocess, f"{path}.preprocess", "kind", str,
                        lambda v: v in ("clip", "reject"),
                        "must be 'clip' or 'reject'")
                c.typed(preprocess, f"{path}.preprocess", "lambda_factor",
                        (int, float), lambda v: v > 0, "must be positive")
        fatal = d.get("fatal", False)
        if not isinstance(fatal, bool):
            c.fail(f"{path}.fatal", "must be a boolean")
            fatal = False
        out.append(SolverSpec(id=sid, variant=variant, params=dict(params),
                              t0_policy=t0_policy, preprocess=preprocess,
                              model=model, fatal=fatal))
    return tuple(out) if not c.problems else None


def _parse_sweep(d, c, signal, noise, solvers):
    if d is None:
        return None
    if not isinstance(d, dict):
        c.fail("sweep", "must be an object")
        return None
    if not c.expect_keys(d, "sweep", required=("axis", "values")):
        return None
    axis = c.typed(d, "sweep", "axis", str, lambda v: v in SWEEP_AXES,
                   f"must be one of {SWEEP_AXES}")
    values = d.get("values")
    if not isinstance(values, list) or not values:
        c.fail("sweep.values", "must be a nonempty list")
        return None
    doms = {
        "p": lambda v: 0 <= v <= 1,
        "alpha": lambda v: 0 < v <= 2,
        "m": lambda v: isinstance(v, int) and v >= 1
             and (signal is None or v <= signal.n),
        "known-support-fraction": lambda v: 0 <= v <= 1,
    }
    for j, v in enumerate(values):
        if not isinstance(v, (int, float)) or (axis and not doms[axis](v)):
            c.fail(f"sweep.values[{j}]", f"outside the {axis!r} domain")
    if axis == "p" and noise is not None and noise["law"] != "p-gaussian":
        c.fail("sweep.axis", "p sweep requires p-gaussian noise")
    if axis == "alpha" and noise is not None and noise["law"] != "alpha-stable":
        c.fail("sweep.axis", "alpha sweep requires alpha-stable noise")
    if axis == "known-support-fraction" and solvers is not None:
        if not any(s.variant == "liht_pks" for s in solvers):
            c.fail("sweep.axis", "fraction sweep requires a liht_pks solver")
    if c.problems:
        return None
    return SweepSpec(axis=axis, values=tuple(values))
