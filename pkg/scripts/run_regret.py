"""Run one or more regret experiment configs and compare against the closed-form bounds.

    python3 scripts/run_regret.py scripts/configs/lower_bound_*.json --workers 1

Each config's trace is written to its ``output.path`` (relative to the working
directory) and a one-line summary is printed per config.
"""

import argparse
import json
import time

from robust_ucb.bounds import BoundInput, expected_pulls_bound, thm_catoni_bound, thm_mom_bound, thm_truncated_bound
from robust_ucb.estimators import EstimatorKind
from robust_ucb.harness import config_to_dict, load_config, run_experiment, write_trace

ESTIMATOR_BOUND = {
    EstimatorKind.TRUNCATED: lambda est, gaps, n: thm_truncated_bound(BoundInput(n=n, gaps=gaps, u=est.params.raw_bound_u, epsilon=est.epsilon)),
    EstimatorKind.MEDIAN_OF_MEANS: lambda est, gaps, n: thm_mom_bound(BoundInput(n=n, gaps=gaps, v=est.params.central_bound_v, epsilon=est.epsilon)),
    EstimatorKind.CATONI: lambda est, gaps, n: thm_catoni_bound(BoundInput(n=n, gaps=gaps, v=est.params.central_bound_v)),
}


def summarize(config, trace) -> dict:
    out = {
        "final_regret_mean": float(trace.regret_mean[-1]),
        "final_regret_stderr": float(trace.regret_stderr[-1]),
        "final_pulls_mean": trace.pulls_mean[-1].tolist(),
    }
    est = config.policy.estimator
    if est is not None and est.kind in ESTIMATOR_BOUND:
        gaps = config.instance.gaps
        out["regret_bound"] = ESTIMATOR_BOUND[est.kind](est, gaps, config.horizon)
        out["pulls_bound"] = {
            i: expected_pulls_bound(g, est.c_policy, est.v_policy, est.epsilon, config.horizon)
            for i, g in enumerate(gaps)
            if g > 0
        }
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("configs", nargs="+")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    for path in args.configs:
        config = load_config(path)
        start = time.perf_counter()
        trace = run_experiment(config, workers=args.workers)
        if config.output is not None:
            write_trace(trace, config.output.path, config.output.format, config=config_to_dict(config))
        record = {"config": path, "seconds": round(time.perf_counter() - start, 1), **summarize(config, trace)}
        print(json.dumps(record))


if __name__ == "__main__":
    main()
