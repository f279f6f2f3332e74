"""Index policies: Robust UCB, its Catoni variant, and a sub-Gaussian baseline.

At round ``t`` the Robust UCB index of arm ``i`` after ``s`` pulls is

    B = estimate(first s rewards, delta = t**-2) + confidence_radius(spec, s, t**-2)

with ``B = +inf`` for unpulled arms. The policy pulls the arm of largest index,
lowest arm index first on ties.

Per-arm caches avoid recomputing estimates from scratch every round. Each cache
returns exactly (bitwise) what the plain estimator function returns on the
stored history; ``use_cache=False`` switches to the plain functions.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .errors import InvalidInputError
from .estimators import (
    EstimatorKind,
    EstimatorSpec,
    MomentParams,
    catoni_mean_from_counts,
    confidence_radius,
    estimate,
    mom_block_count,
    median_of_means,
    truncation_thresholds,
)

__all__ = [
    "MAX_ABS_REWARD",
    "round_delta",
    "RobustUCB",
    "ModifiedRobustUCB",
    "BaselineUCB",
]

MAX_ABS_REWARD = 1e300

# Every finite double is an integer multiple of 2**-1074, so sums scaled by
# 2**1074 are exact Python ints; int / int rounds correctly, like math.fsum.
_SCALE = 1 << 1074


def _exact(x: float) -> int:
    num, den = x.as_integer_ratio()
    return num * (_SCALE // den)


def round_delta(t: int) -> float:
    """Confidence level ``t**-2`` used at round ``t``."""
    return 1.0 / (t * t)


class _History:
    """Growable float64 buffer of one arm's rewards in arrival order."""

    def __init__(self, capacity: int = 64):
        self._buf = np.empty(capacity)
        self.size = 0

    def append(self, x: float):
        if self.size == self._buf.size:
            self._buf = np.concatenate([self._buf, np.empty(self._buf.size)])
        self._buf[self.size] = x
        self.size += 1

    def view(self) -> np.ndarray:
        return self._buf[: self.size]

    def __len__(self):
        return self.size


class _EmpiricalCache:
    def __init__(self, history: _History, spec: EstimatorSpec):
        self.history = history
        self.exact_sum = 0

    def append(self, x: float):
        self.exact_sum += _exact(x)

    def estimate(self, delta: float) -> float:
        return (self.exact_sum / _SCALE) / self.history.size


class _TruncatedCache:
    """Kept-sample bookkeeping for the truncated mean.

    Sample ``r`` is kept iff ``log(1/delta) <= u r / |x_r|^(1+eps)``. As delta
    shrinks over rounds, samples only ever drop out, so a min-heap of these
    critical levels tells which ones leave. Any level within a relative margin
    of the query triggers a full recompute with the reference thresholds.
    """

    MARGIN = 1e-9

    def __init__(self, history: _History, spec: EstimatorSpec):
        self.history = history
        self.params = spec.params
        self.u = spec.params.raw_bound_u
        self.power = 1.0 + spec.epsilon
        self.log_inv = None
        self.synced = 0
        self.exact_sum = 0
        self.heap: list[tuple[float, int]] = []

    def append(self, x: float):
        pass

    def _critical(self, x: float, r: int) -> float:
        ax = abs(x)
        if ax == 0.0:
            return math.inf
        # log space: |x|^(1+eps) under- or overflows at the extremes of the float range
        level = math.log(self.u * r) - self.power * math.log(ax)
        return math.inf if level > 709.0 else math.exp(level)

    def _rebuild(self, delta: float, log_inv: float):
        x = self.history.view()
        keep = np.abs(x) <= truncation_thresholds(x.size, delta, self.params)
        self.exact_sum = 0
        self.heap = []
        for r, (value, kept) in enumerate(zip(x.tolist(), keep.tolist()), start=1):
            if kept:
                self.exact_sum += _exact(value)
                crit = self._critical(value, r)
                if crit != math.inf:
                    self.heap.append((crit, r))
        heapq.heapify(self.heap)
        self.log_inv = log_inv
        self.synced = x.size

    def _advance(self, log_inv: float) -> bool:
        lo, hi = log_inv * (1.0 - self.MARGIN), log_inv * (1.0 + self.MARGIN)
        buf = self.history.view()
        heap = self.heap
        while heap and heap[0][0] < hi:
            crit, r = heap[0]
            if crit > lo:
                return False
            heapq.heappop(heap)
            self.exact_sum -= _exact(float(buf[r - 1]))
        for r in range(self.synced + 1, self.history.size + 1):
            value = float(buf[r - 1])
            crit = self._critical(value, r)
            if crit >= hi:
                self.exact_sum += _exact(value)
                if crit != math.inf:
                    heapq.heappush(heap, (crit, r))
            elif crit > lo:
                return False
        self.log_inv = log_inv
        self.synced = self.history.size
        return True

    def estimate(self, delta: float) -> float:
        log_inv = -math.log(delta)
        if self.u == 0.0 or self.log_inv is None or log_inv < self.log_inv or not self._advance(log_inv):
            self._rebuild(delta, log_inv)
        return (self.exact_sum / _SCALE) / self.history.size


class _MedianOfMeansCache:
    def __init__(self, history: _History, spec: EstimatorSpec):
        self.history = history
        self.key = None
        self.value = math.nan

    def append(self, x: float):
        pass

    def estimate(self, delta: float) -> float:
        key = (self.history.size, mom_block_count(self.history.size, delta))
        if key != self.key:
            self.value = median_of_means(self.history.view(), delta)
            self.key = key
        return self.value


class _CatoniCache:
    """Sorted distinct rewards with multiplicities, as ``np.unique`` returns them."""

    def __init__(self, history: _History, spec: EstimatorSpec):
        self.history = history
        self.params = spec.params
        self.values = np.empty(0)
        self.weights = np.empty(0)
        self.key = None
        self.value = math.nan

    def append(self, x: float):
        j = int(np.searchsorted(self.values, x))
        if j < self.values.size and self.values[j] == x:
            self.weights[j] += 1.0
        else:
            self.values = np.insert(self.values, j, x)
            self.weights = np.insert(self.weights, j, 1.0)

    def estimate(self, delta: float) -> float:
        key = (self.history.size, delta)
        if key != self.key:
            self.value = catoni_mean_from_counts(self.values, self.weights, delta, self.params)
            self.key = key
        return self.value


_CACHES = {
    EstimatorKind.EMPIRICAL: _EmpiricalCache,
    EstimatorKind.TRUNCATED: _TruncatedCache,
    EstimatorKind.MEDIAN_OF_MEANS: _MedianOfMeansCache,
    EstimatorKind.CATONI: _CatoniCache,
}


class _IndexPolicy:
    """Shared bookkeeping: histories, pull counts, round counter, argmax."""

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise InvalidInputError(f"need at least one arm, got {n_arms}")
        self.n_arms = n_arms
        self.t = 0
        self._histories = [_History() for _ in range(n_arms)]

    @property
    def pull_counts(self) -> list[int]:
        return [h.size for h in self._histories]

    def history(self, arm: int) -> np.ndarray:
        return self._histories[arm].view().copy()

    def index(self, arm: int, t: int) -> float:
        raise NotImplementedError

    def select_arm(self, t: int | None = None) -> int:
        """Arm with the largest index at round ``t`` (default: the next round)."""
        if t is None:
            t = self.t + 1
        if t < 1:
            raise InvalidInputError(f"round must be >= 1, got {t}")
        best, best_value = 0, self.index(0, t)
        for arm in range(1, self.n_arms):
            value = self.index(arm, t)
            if value > best_value:
                best, best_value = arm, value
        return best

    def update(self, arm: int, reward: float):
        reward = float(reward)
        if not abs(reward) <= MAX_ABS_REWARD:
            raise InvalidInputError(f"reward {reward} is not finite or exceeds {MAX_ABS_REWARD:g} in magnitude")
        self._histories[arm].append(reward)
        self._on_update(arm, reward)
        self.t += 1
        return self

    def _on_update(self, arm: int, reward: float):
        pass


class RobustUCB(_IndexPolicy):
    """Robust UCB driven by any estimator in :class:`EstimatorKind`."""

    def __init__(self, spec: EstimatorSpec, n_arms: int, use_cache: bool = True):
        super().__init__(n_arms)
        self.spec = spec
        self.use_cache = use_cache
        self._caches = [_CACHES[spec.kind](h, spec) for h in self._histories]

    def _on_update(self, arm, reward):
        self._caches[arm].append(reward)

    def estimate(self, arm: int, t: int) -> float:
        """Estimate from the arm's full history at confidence ``t**-2``."""
        delta = round_delta(t)
        if self.use_cache:
            return self._caches[arm].estimate(delta)
        return estimate(self.spec, self._histories[arm].view(), delta)

    def radius(self, arm: int, t: int) -> float:
        return confidence_radius(self.spec, self._histories[arm].size, round_delta(t))

    def index(self, arm: int, t: int) -> float:
        if self._histories[arm].size == 0:
            return math.inf
        return self.estimate(arm, t) + self.radius(arm, t)


class ModifiedRobustUCB(RobustUCB):
    """Robust UCB with Catoni's estimator and the sample-size gate ``s >= 8 log t``.

    Arms below the gate have an infinite index.
    """

    def __init__(self, v: float, n_arms: int, use_cache: bool = True):
        spec = EstimatorSpec.build(EstimatorKind.CATONI, MomentParams(1.0, central_bound_v=v))
        super().__init__(spec, n_arms, use_cache)

    def index(self, arm: int, t: int) -> float:
        if self._histories[arm].size < 8.0 * math.log(t):
            return math.inf
        return super().index(arm, t)


class BaselineUCB(_IndexPolicy):
    """Empirical mean plus ``sqrt(4 v log t / s)`` for sub-Gaussian rewards."""

    def __init__(self, variance_factor: float, n_arms: int):
        if not variance_factor > 0.0:
            raise InvalidInputError(f"variance factor must be positive, got {variance_factor}")
        super().__init__(n_arms)
        self.variance_factor = variance_factor
        self._sums = [0] * n_arms

    def _on_update(self, arm, reward):
        self._sums[arm] += _exact(reward)

    def index(self, arm: int, t: int) -> float:
        s = self._histories[arm].size
        if s == 0:
            return math.inf
        mean = (self._sums[arm] / _SCALE) / s
        return mean + math.sqrt(4.0 * self.variance_factor * math.log(t) / s)
