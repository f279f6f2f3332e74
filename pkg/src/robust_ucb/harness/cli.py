"""Command-line entry point: ``simulate``, ``concentration`` and ``bounds``.

Exit status is 0 on success and 2 on a validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .. import bounds as bounds_mod
from ..distributions import distribution_from_dict
from ..errors import ConfigError, InvalidInputError
from ..estimators import EstimatorKind
from .concentration import run_concentration
from .config import config_to_dict, load_config, parse_estimator
from .io import write_trace
from .runner import run_experiment

EXIT_OK = 0
EXIT_INVALID = 2


def _json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", what) from exc


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    output = args.output or (config.output.path if config.output else None)
    fmt = args.format or (config.output.format if config.output else "csv")
    start = time.perf_counter()
    trace = run_experiment(config, workers=args.workers)
    elapsed = time.perf_counter() - start
    if output:
        write_trace(trace, output, fmt, config=config_to_dict(config))
    summary = {
        "horizon": config.horizon,
        "repetitions": config.repetitions,
        "final_regret_mean": float(trace.regret_mean[-1]),
        "final_regret_stderr": float(trace.regret_stderr[-1]),
        "final_pulls_mean": trace.pulls_mean[-1].tolist(),
        "output": output,
        "seconds": round(elapsed, 3),
    }
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_concentration(args) -> int:
    record = {"kind": args.estimator, "epsilon": args.epsilon}
    if args.raw_bound_u is not None:
        record["raw_bound_u"] = args.raw_bound_u
    if args.central_bound_v is not None:
        record["central_bound_v"] = args.central_bound_v
    spec = parse_estimator(record, "estimator")
    dist = distribution_from_dict(_json_arg(args.dist, "dist"), "dist")
    report = run_concentration(
        spec, dist, args.n, args.trials, args.seed, delta=args.delta, eta=args.eta, workers=args.workers
    )
    out = report.to_dict()
    out["within_3se"] = report.within(3.0)
    print(json.dumps(out))
    return EXIT_OK


def _cmd_bounds(args) -> int:
    params = _json_arg(args.params, "params")
    if not isinstance(params, dict):
        raise ConfigError("expected a JSON object", "params")
    value = bounds_mod.evaluate(args.which, params)
    print(json.dumps({"which": args.which, "params": params, "value": value}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-ucb", description="Robust UCB for heavy-tailed bandits.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured regret experiment")
    sim.add_argument("--config", required=True, help="path to a JSON experiment config")
    sim.add_argument("--workers", type=int, default=None, help="worker processes (default: $ROBUST_UCB_WORKERS or 1)")
    sim.add_argument("--output", default=None, help="override output.path from the config")
    sim.add_argument("--format", choices=("csv", "json"), default=None, help="override output.format")
    sim.set_defaults(func=_cmd_simulate)

    conc = sub.add_parser("concentration", help="Monte Carlo deviation check of one estimator")
    conc.add_argument("--estimator", required=True, choices=[k.value for k in EstimatorKind])
    conc.add_argument("--dist", required=True, help='JSON record, e.g. \'{"law": "gaussian", "params": {"mean": 0, "variance": 1}}\'')
    conc.add_argument("--n", type=int, required=True)
    group = conc.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", type=float)
    group.add_argument("--eta", type=float, help="fixed deviation (empirical mean only)")
    conc.add_argument("--trials", type=int, default=10_000)
    conc.add_argument("--seed", type=int, default=0)
    conc.add_argument("--epsilon", type=float, default=1.0)
    conc.add_argument("--raw-bound-u", type=float, default=None)
    conc.add_argument("--central-bound-v", type=float, default=None)
    conc.add_argument("--workers", type=int, default=None)
    conc.set_defaults(func=_cmd_concentration)

    bnd = sub.add_parser("bounds", help="evaluate a closed-form bound")
    bnd.add_argument("--which", required=True, choices=sorted(bounds_mod.BOUNDS))
    bnd.add_argument("--params", required=True, help='JSON object, e.g. \'{"n": 1000, "gaps": [0, 0.5], "c": 2, "v": 1}\'')
    bnd.set_defaults(func=_cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
