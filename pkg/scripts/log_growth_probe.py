"""Track regret / log t over successive decades for a regret config at a longer horizon.

    python3 scripts/log_growth_probe.py scripts/configs/lower_bound_catoni.json --horizon 1000000 --repetitions 10

For each decade [10^j, 10^(j+1)] inside the horizon, prints the mean of
regret/log t and its relative spread (max - min) / mean. Flat ratios mean the
run has reached logarithmic growth.
"""

import argparse
import dataclasses
import json

import numpy as np

from robust_ucb.harness import load_config, run_experiment
from robust_ucb.harness.config import default_checkpoints


def decade_table(checkpoints, regret_mean):
    t = np.asarray(checkpoints, dtype=float)
    rows = []
    for j in range(1, int(np.log10(t[-1])) + 1):
        lo, hi = 10.0 ** (j - 1), min(10.0**j, t[-1])
        mask = (t >= lo) & (t <= hi) & (t > 1)
        if mask.sum() < 2:
            continue
        ratio = regret_mean[mask] / np.log(t[mask])
        rows.append({"from": int(lo), "to": int(hi), "mean_ratio": float(ratio.mean()), "spread": float((ratio.max() - ratio.min()) / ratio.mean())})
    if rows and rows[-1]["to"] == int(t[-1]) and rows[-1]["from"] == int(t[-1] / 10):
        return rows
    last = t >= t[-1] / 10.0
    ratio = regret_mean[last] / np.log(t[last])
    rows.append({"from": int(t[-1] / 10), "to": int(t[-1]), "mean_ratio": float(ratio.mean()), "spread": float((ratio.max() - ratio.min()) / ratio.mean())})
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config")
    parser.add_argument("--horizon", type=int, default=None)
    parser.add_argument("--repetitions", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    config = load_config(args.config)
    changes = {"output": None}
    if args.horizon is not None:
        changes["horizon"] = args.horizon
        changes["checkpoints"] = default_checkpoints(args.horizon, 80)
    if args.repetitions is not None:
        changes["repetitions"] = args.repetitions
    config = dataclasses.replace(config, **changes)
    trace = run_experiment(config, workers=args.workers)
    for row in decade_table(config.checkpoints, trace.regret_mean):
        print(json.dumps(row))


if __name__ == "__main__":
    main()
