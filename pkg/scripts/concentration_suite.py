"""Deviation-rate table for every (estimator, law, n, delta) in the standard suite.

    python3 scripts/concentration_suite.py --trials 10000 --out results/concentration.csv

A row passes when both tail rates are at most delta + 3 binomial standard errors.
"""

import argparse
import csv
import math
import sys
import time
from pathlib import Path

from robust_ucb.distributions import Gaussian, Pareto, Shifted, lower_bound_pair, moments
from robust_ucb.estimators import EstimatorKind, EstimatorSpec, MomentParams
from robust_ucb.harness import run_concentration


def suite():
    nu1, nu2 = lower_bound_pair(0.2, 1.0)
    pareto = Pareto(2.2)
    centered = Shifted(Pareto(2.5), -Pareto(2.5).mean())
    spec = lambda kind, **b: EstimatorSpec.build(kind, MomentParams(1.0, **b))
    central = lambda d: moments(d, 1.0).central
    return [
        ("truncated", "two_point_best", nu1, spec(EstimatorKind.TRUNCATED, raw_bound_u=1.0)),
        ("truncated", "two_point_worse", nu2, spec(EstimatorKind.TRUNCATED, raw_bound_u=1.0)),
        ("truncated", "pareto_2.2", pareto, spec(EstimatorKind.TRUNCATED, raw_bound_u=moments(pareto, 1.0).raw)),
        ("median_of_means", "pareto_2.2", pareto, spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=central(pareto))),
        ("median_of_means", "pareto_2.2_plus_100", Shifted(pareto, 100.0), spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=central(pareto))),
        ("median_of_means", "gaussian", Gaussian(0.0, 1.0), spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=1.0)),
        ("catoni", "gaussian", Gaussian(0.0, 1.0), spec(EstimatorKind.CATONI, central_bound_v=1.0)),
        ("catoni", "centered_pareto_2.5", centered, spec(EstimatorKind.CATONI, central_bound_v=central(centered))),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 500, 5000])
    parser.add_argument("--deltas", type=float, nargs="+", default=[0.1, 0.01])
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None, help="optional CSV path")
    args = parser.parse_args()

    header = ["estimator", "law", "n", "delta", "threshold", "upper_rate", "lower_rate", "limit", "pass"]
    rows = []
    writer = csv.writer(sys.stdout)
    writer.writerow(header)
    start = time.perf_counter()
    for c, (est, label, dist, spec) in enumerate(suite()):
        for n in args.sizes:
            for d, delta in enumerate(args.deltas):
                rep = run_concentration(spec, dist, n, args.trials, args.seed + 1000 * c + 10 * n + d, delta=delta, workers=args.workers)
                limit = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / args.trials)
                ok = rep.upper_rate <= limit and rep.lower_rate <= limit
                row = [est, label, n, delta, f"{rep.threshold:.6g}", rep.upper_rate, rep.lower_rate, f"{limit:.6g}", ok]
                writer.writerow(row)
                rows.append(row)
    print(f"# {sum(r[-1] for r in rows)}/{len(rows)} pass, {time.perf_counter() - start:.0f}s", file=sys.stderr)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerows([header] + rows)


if __name__ == "__main__":
    main()
