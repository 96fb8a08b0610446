"""Command-line entry point: ``composite-dp {bench,optimize,certify,sample}``.

Exit codes: 0 success, 1 unexpected/numeric failure, 2 usage, 3 data,
4 invalid parameters or infeasible configuration, 5 DP certification failure.
The default seed can be set with the ``COMPOSITE_DP_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, shapes
from .bench.runner import ANCHORS, FORMATS, BenchConfig, run_benchmark
from .domain import PrivacyParams
from .errors import CompositeDPError, InvalidParameter
from .mechanism import build, publish
from .optimizer import OptimizerConfig, optimize_enumeration, optimize_search
from .sampler import build_cdf, sample

SEED_ENV = "COMPOSITE_DP_SEED"
EXIT_DATA = 3

logger = logging.getLogger("composite_dp")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidParameter(f"{SEED_ENV} must be an integer, got {raw!r}")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _per_query(text: str, parse):
    """``auto`` | ``VALUE`` | ``query=VALUE,query=VALUE``."""
    if "=" not in text:
        return text if text == "auto" else parse(text)
    out = {}
    for item in text.split(","):
        q, _, v = item.partition("=")
        out[q.strip()] = v.strip() if v.strip() == "auto" else parse(v.strip())
    return out


def _bounds_value(text: str):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"bounds look like LOWER:UPPER, got {text!r}")
    return [float(lo), float(hi)]


def _add_shape_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pair", default="A1B1", help="built-in activation/base pair, e.g. A2B1")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--L", type=float, default=1.0, help="canonical half-width")
    p.add_argument("--k", type=float, help="activation height (skip optimisation)")
    p.add_argument("--m", type=float, help="activation width (with --k)")
    p.add_argument("--worst-case", action="store_true",
                   help="optimise variance at Cp = Cp_max instead of Cp = 0")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="composite-dp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a query x mechanism x epsilon sweep over a CSV")
    b.add_argument("--config", type=Path, help="JSON object with BenchConfig fields")
    b.add_argument("--data", dest="dataset", help="CSV file with a header row")
    b.add_argument("--column")
    b.add_argument("--queries", help="comma list of max,min,mean,mode,variance,count")
    b.add_argument("--epsilons", type=_floats)
    b.add_argument("--mechanisms", help="comma list, e.g. A1B1,Laplace,Gaussian")
    b.add_argument("--repetitions", type=int)
    b.add_argument("--sensitivity", type=lambda t: _per_query(t, float),
                   help="auto | VALUE | query=VALUE,...")
    b.add_argument("--bounds", type=lambda t: _per_query(t, _bounds_value),
                   help="auto | L:U | query=L:U,...")
    b.add_argument("--delta", type=float)
    b.add_argument("--L", type=float)
    b.add_argument("--seed", type=int)
    b.add_argument("--format", dest="output_format", choices=FORMATS)
    b.add_argument("--anchor", choices=ANCHORS)
    b.add_argument("--jobs", type=int)
    b.add_argument("--worst-case", dest="worst_case", action="store_const", const=True)
    b.add_argument("--timing", dest="include_timing", action="store_const", const=True,
                   help="add wall_time (makes reports non-reproducible)")
    b.add_argument("--output", type=Path, help="write the report here instead of stdout")

    o = sub.add_parser("optimize", help="print the optimised shape for a pair and epsilon")
    _add_shape_args(o)
    o.add_argument("--steps", type=_floats, default=[0.1, 0.01, 0.001])
    o.add_argument("--max-iterations", type=int, default=10_000)
    o.add_argument("--target", type=float,
                   help="stop at the first variance below this (random search)")
    o.add_argument("--seed", type=int)

    c = sub.add_parser("certify", help="analytic DP ratio plus an empirical epsilon probe")
    _add_shape_args(c)
    c.add_argument("--samples", type=int, default=200_000, help="draws per input for the probe")
    c.add_argument("--bins", type=int, default=64)
    c.add_argument("--seed", type=int)

    s = sub.add_parser("sample", help="emit N draws to standard output")
    _add_shape_args(s)
    s.add_argument("-n", type=int, default=10)
    s.add_argument("--cp", type=float, help="canonical input (default 0)")
    s.add_argument("--value", type=float, help="raw value to publish in real space")
    s.add_argument("--sensitivity", type=float, default=1.0)
    s.add_argument("--center", type=float, help="centre of the real output range "
                   "(default: --value)")
    s.add_argument("--seed", type=int)
    return parser


def _spec_from_args(args):
    act, base = shapes.parse_pair(args.pair)
    if args.k is not None or args.m is not None:
        if args.k is None or args.m is None:
            raise InvalidParameter("--k and --m go together")
        return shapes.solve_normalization(act, base, args.k, args.m, args.L, args.epsilon), None
    res = optimize_enumeration(act, base, args.epsilon, args.L,
                               OptimizerConfig(worst_case=args.worst_case))
    return res.spec, res


def _spec_dict(spec) -> dict:
    p = spec.params
    lo, hi = shapes.cp_bounds(spec)
    return {"pair": spec.name, "epsilon": spec.epsilon, "L": p.L, "k": p.k, "m": p.m,
            "y": p.y, "t": p.t, "cp_min": lo, "cp_max": hi}


def _cmd_bench(args) -> int:
    data = {}
    if args.config:
        data = json.loads(args.config.read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise InvalidParameter("config file must hold a JSON object")
    for name in ("dataset", "column", "queries", "epsilons", "mechanisms", "repetitions",
                 "sensitivity", "bounds", "delta", "L", "seed", "output_format", "anchor",
                 "jobs", "worst_case", "include_timing"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if "dataset" not in data:
        raise InvalidParameter("bench needs --data or a config with 'dataset'")
    # precedence for the seed: --seed, then the environment, then the config file
    if args.seed is None and SEED_ENV in os.environ:
        data["seed"] = _default_seed()
    cfg = BenchConfig.from_mapping(data)
    report = run_benchmark(cfg)
    text = report.serialize(cfg.output_format)
    if args.output:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_optimize(args) -> int:
    act, base = shapes.parse_pair(args.pair)
    if args.target is not None:
        seed = _default_seed() if args.seed is None else args.seed
        res = optimize_search(act, base, args.epsilon, args.L, step=args.steps[-1],
                              variance_target=args.target, seed=seed,
                              max_iterations=args.max_iterations)
    else:
        cfg = OptimizerConfig(steps=tuple(args.steps),
                              max_iterations_per_step=args.max_iterations,
                              worst_case=args.worst_case)
        res = optimize_enumeration(act, base, args.epsilon, args.L, cfg)
    out = _spec_dict(res.spec)
    out.update(variance=res.best_variance, evaluations=res.evaluations,
               h1_rate=analysis.h1_rate(res.spec))
    print(json.dumps(out, indent=2))
    return 0


def _cmd_certify(args) -> int:
    spec, _ = _spec_from_args(args)
    ratio, witness = analysis.dp_ratio(spec)
    out = _spec_dict(spec)
    out.update(ratio=ratio, bound=float(np.exp(spec.epsilon)), witness=witness)
    analysis.certify_dp(spec)
    lo, hi = shapes.cp_bounds(spec)
    seed = _default_seed() if args.seed is None else args.seed
    est = analysis.empirical_epsilon_probe(spec, lo, hi, bins=args.bins,
                                           n_samples=args.samples, seed=seed)
    out.update(empirical_epsilon=est.estimate, empirical_band=est.band, certified=True)
    print(json.dumps(out, indent=2, default=float))
    return 0


def _cmd_sample(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    if args.value is not None:
        if args.cp is not None:
            raise InvalidParameter("give --cp or --value, not both")
        act, base = shapes.parse_pair(args.pair)
        privacy = PrivacyParams(args.epsilon, args.sensitivity)
        center = args.value if args.center is None else args.center
        mech = build(privacy, act, base, L=args.L,
                     cfg=OptimizerConfig(worst_case=args.worst_case), center=center)
        draws = np.atleast_1d(publish(mech, args.value, rng, args.n))
    else:
        spec, _ = _spec_from_args(args)
        a = shapes.solve_activation_offset(spec, 0.0 if args.cp is None else args.cp)
        draws = np.atleast_1d(sample(build_cdf(spec, a), rng, args.n))
    sys.stdout.write("".join(f"{x!r}\n" for x in draws.tolist()))
    return 0


COMMANDS = {"bench": _cmd_bench, "optimize": _cmd_optimize,
            "certify": _cmd_certify, "sample": _cmd_sample}


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CompositeDPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        print(f"error: bad config file: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # unknown query / mechanism names and similar user input problems
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        logger.debug("unexpected failure", exc_info=True)
        print(f"error: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
