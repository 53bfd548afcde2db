"""Command-line interface.

Subcommands:
  lcs run <config.json> [--out DIR] [--seed N] [--threads N]
  lcs bench-timing [--sizes 128,256,...]
  lcs verify-bounds [--instances N]
  lcs image [--side N] [--m N] [--s N] [--noise cauchy:1.0] [--pks] ...

Exit codes: 0 success, 1 configuration error, 2 runtime failure (solver
divergence in a fatal solver, or bound violations in verify-bounds).
"""

import argparse
import sys
from dataclasses import replace

from .harness.bounds import format_bound_summary, run_bound_suite
from .harness.config import ConfigError, ExperimentConfig
from .harness.image import image_experiment, write_image_outputs
from .harness.runner import run_experiment, write_outputs
from .harness.timing import bench_timing, format_timing_table
from .noise import NoiseSpec
from .solvers import DivergenceError


def _parse_noise_arg(text):
    """law[:param[,param...]] -> NoiseSpec. Examples: none, cauchy:1.0,
    alpha-stable:1.0,0.1, p-gaussian:0.01,0.05,1000."""
    law, _, rest = text.partition(":")
    vals = [float(v) for v in rest.split(",") if v] if rest else []
    if law == "none":
        return NoiseSpec.none()
    if law == "cauchy":
        if len(vals) != 1:
            raise ValueError("cauchy noise takes one parameter: sigma")
        return NoiseSpec.cauchy(vals[0])
    if law == "alpha-stable":
        if len(vals) != 2:
            raise ValueError("alpha-stable noise takes: alpha,sigma")
        return NoiseSpec.alpha_stable(vals[0], vals[1])
    if law == "p-gaussian":
        if len(vals) != 3:
            raise ValueError("p-gaussian noise takes: variance,p,delta")
        return NoiseSpec.p_gaussian(vals[0], vals[1], vals[2])
    raise ValueError(f"unknown noise law {law!r}")


def _cmd_run(args):
    try:
        with open(args.config) as fh:
            config = ExperimentConfig.from_json(fh.read())
        if args.seed is not None:
            config = replace(config, base_seed=args.seed)
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return 1
    try:
        rows = run_experiment(config, threads=args.threads)
    except DivergenceError as e:
        print(f"fatal solver divergence: {e}", file=sys.stderr)
        return 2
    paths = write_outputs(rows, config, args.out)
    for p in paths:
        print(p)
    return 0


def _cmd_bench_timing(args):
    sizes = tuple(int(v) for v in args.sizes.split(","))
    results = bench_timing(sizes=sizes)
    print(format_timing_table(results))
    return 0


def _cmd_verify_bounds(args):
    summary = run_bound_suite(instances=args.instances)
    print(format_bound_summary(summary))
    return 0 if summary["violations"] == 0 else 2


def _cmd_image(args):
    try:
        noise = _parse_noise_arg(args.noise)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 1
    try:
        rows, arrays = image_experiment(side=args.side, s=args.s, m=args.m,
                                        noise=noise, pks=args.pks,
                                        seed=args.seed)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 1
    paths = write_image_outputs(rows, arrays, args.out)
    for row in rows:
        print(f"{row.solver_id}: {row.mean_rsnr:.2f} dB")
    for p in paths:
        print(p)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lcs",
        description="Robust compressed sensing: Lorentzian iterative hard "
                    "thresholding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configured Monte-Carlo experiment")
    p.add_argument("config", help="path to a JSON experiment config")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config base_seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for trial fan-out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench-timing",
                       help="per-iteration timing across problem sizes")
    p.add_argument("--sizes", default="128,256,512,1024,2048",
                   help="comma-separated n values (m = n/2)")
    p.set_defaults(func=_cmd_bench_timing)

    p = sub.add_parser("verify-bounds",
                       help="run the recovery-bound verification suite")
    p.add_argument("--instances", type=int, default=200)
    p.set_defaults(func=_cmd_verify_bounds)

    p = sub.add_parser("image", help="synthetic-image recovery experiment")
    p.add_argument("--side", type=int, default=64)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--noise", default="cauchy:1.0")
    p.add_argument("--pks", action="store_true",
                   help="also run the known-approximation-band variant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_image)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
