"""Seeded Monte Carlo runner for bandit policies.

Repetition ``r`` draws the rewards of arm ``i`` from the stream derived from
``(master_seed, r, i)``: the ``s``-th pull of an arm receives the ``s``-th draw
of its stream. Results therefore do not depend on how repetitions are spread
over worker processes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..distributions import make_stream
from .config import ExperimentConfig

__all__ = ["WORKERS_ENV", "RepetitionResult", "RegretTrace", "resolve_workers", "run_repetition", "run_experiment"]

WORKERS_ENV = "ROBUST_UCB_WORKERS"


@dataclass
class RepetitionResult:
    index: int
    regret: np.ndarray  # cumulative pseudo-regret at each checkpoint
    pulls: np.ndarray  # (checkpoints, K) pull counts at each checkpoint
    arms: np.ndarray | None = None  # chosen arm per round, 0-based


@dataclass
class RegretTrace:
    checkpoints: tuple[int, ...]
    regret: np.ndarray  # (repetitions, checkpoints)
    pulls: np.ndarray  # (repetitions, checkpoints, K)
    arms: list[np.ndarray] | None = None

    @property
    def repetitions(self) -> int:
        return self.regret.shape[0]

    @property
    def n_arms(self) -> int:
        return self.pulls.shape[2]

    @property
    def regret_mean(self) -> np.ndarray:
        return self.regret.mean(axis=0)

    @property
    def regret_stderr(self) -> np.ndarray:
        if self.repetitions < 2:
            return np.zeros(len(self.checkpoints))
        return self.regret.std(axis=0, ddof=1) / np.sqrt(self.repetitions)

    @property
    def pulls_mean(self) -> np.ndarray:
        return self.pulls.mean(axis=0)

    @property
    def final_pulls(self) -> np.ndarray:
        return self.pulls[:, -1, :]

    def pulls_stderr(self, arm: int) -> float:
        x = self.final_pulls[:, arm]
        if x.size < 2:
            return 0.0
        return float(x.std(ddof=1) / np.sqrt(x.size))


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else ``$ROBUST_UCB_WORKERS``, else 1."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, int(workers))


def run_repetition(config: ExperimentConfig, rep: int) -> RepetitionResult:
    instance = config.instance
    n = config.horizon
    draws = [arm.draw(make_stream(config.master_seed, rep, i), n).tolist() for i, arm in enumerate(instance.arms)]
    gaps = instance.gaps
    policy = config.policy.build(instance.n_arms)
    counts = [0] * instance.n_arms
    checkpoints = config.checkpoints
    regret = np.empty(len(checkpoints))
    pulls = np.empty((len(checkpoints), instance.n_arms), dtype=np.int64)
    arms = np.empty(n, dtype=np.int64) if config.record_arms else None
    cumulative = 0.0
    j = 0
    for t in range(1, n + 1):
        arm = policy.select_arm(t)
        policy.update(arm, draws[arm][counts[arm]])
        counts[arm] += 1
        cumulative += gaps[arm]
        if arms is not None:
            arms[t - 1] = arm
        if j < len(checkpoints) and t == checkpoints[j]:
            regret[j] = cumulative
            pulls[j] = counts
            j += 1
    return RepetitionResult(rep, regret, pulls, arms)


def _run_chunk(args) -> list[RepetitionResult]:
    config, reps = args
    return [run_repetition(config, r) for r in reps]


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> RegretTrace:
    """Play every repetition and stack the results in repetition order."""
    workers = resolve_workers(workers)
    reps = list(range(config.repetitions))
    if workers == 1 or len(reps) == 1:
        results = [run_repetition(config, r) for r in reps]
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [res for chunk in pool.map(_run_chunk, [(config, c) for c in chunks]) for res in chunk]
        results.sort(key=lambda res: res.index)
    return RegretTrace(
        checkpoints=tuple(config.checkpoints),
        regret=np.stack([r.regret for r in results]),
        pulls=np.stack([r.pulls for r in results]),
        arms=[r.arms for r in results] if config.record_arms else None,
    )
