"""Mean estimators for heavy-tailed samples and their confidence radii.

Every estimator here is a pure function of ``(sample, delta, params)``. The
radius of each estimator has the common form

    v ** (1 / (1 + eps)) * (c * log(1 / delta) / n) ** (eps / (1 + eps))

with estimator-specific constants ``(c, v)`` carried by :class:`EstimatorSpec`.
The empirical mean is the exception: its radius is polynomial in ``1 / delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numba import njit

from .errors import InvalidInputError, PreconditionError

__all__ = [
    "EstimatorKind",
    "MomentParams",
    "EstimatorSpec",
    "empirical_mean",
    "empirical_radius",
    "truncation_thresholds",
    "truncated_mean",
    "mom_block_count",
    "median_of_means",
    "catoni_psi",
    "catoni_alpha",
    "catoni_tolerance",
    "catoni_mean",
    "catoni_mean_from_counts",
    "catoni_residual",
    "assumption_radius",
    "confidence_radius",
    "estimate",
]

ROOT_MAX_ITER = 200
ROOT_RTOL = 1e-9


class EstimatorKind(str, Enum):
    EMPIRICAL = "empirical"
    TRUNCATED = "truncated"
    MEDIAN_OF_MEANS = "median_of_means"
    CATONI = "catoni"


@dataclass(frozen=True)
class MomentParams:
    """Moment order ``1 + epsilon`` and the known bound on that moment.

    ``raw_bound_u`` bounds ``E|X|^(1+eps)``; ``central_bound_v`` bounds
    ``E|X - mu|^(1+eps)``.
    """

    epsilon: float
    raw_bound_u: float | None = None
    central_bound_v: float | None = None

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise InvalidInputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        for name in ("raw_bound_u", "central_bound_v"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value >= 0.0):
                raise InvalidInputError(f"{name} must be a finite nonnegative real, got {value}")


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator together with the policy constants ``c`` and ``v``.

    Build instances with :meth:`build`, which derives the constants from the
    moment parameters. Direct construction is validated against the same rules.
    """

    kind: EstimatorKind
    params: MomentParams
    c_policy: float
    v_policy: float

    @classmethod
    def build(cls, kind: EstimatorKind | str, params: MomentParams) -> "EstimatorSpec":
        kind = EstimatorKind(kind)
        c, v = _policy_constants(kind, params)
        return cls(kind, params, c, v)

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        c, v = _policy_constants(self.kind, self.params)
        if not (math.isclose(self.c_policy, c, rel_tol=1e-12) and math.isclose(self.v_policy, v, rel_tol=1e-12)):
            raise InvalidInputError(
                f"{self.kind.value}: policy constants (c={self.c_policy}, v={self.v_policy}) "
                f"do not match the derived values (c={c}, v={v})"
            )

    @property
    def epsilon(self) -> float:
        return self.params.epsilon


def _policy_constants(kind: EstimatorKind, params: MomentParams) -> tuple[float, float]:
    eps = params.epsilon
    if kind is EstimatorKind.TRUNCATED:
        if params.raw_bound_u is None:
            raise InvalidInputError("truncated mean requires raw_bound_u")
        return 4.0 ** ((1.0 + eps) / eps), params.raw_bound_u
    if kind is EstimatorKind.MEDIAN_OF_MEANS:
        if params.central_bound_v is None:
            raise InvalidInputError("median-of-means radius requires central_bound_v")
        return 16.0, 12.0 * params.central_bound_v
    if kind is EstimatorKind.CATONI:
        if eps != 1.0:
            raise InvalidInputError(f"Catoni's estimator requires epsilon = 1, got {eps}")
        if not params.central_bound_v:
            raise InvalidInputError("Catoni's estimator requires a positive central_bound_v")
        return 4.0, params.central_bound_v
    if params.central_bound_v is None:
        raise InvalidInputError("empirical-mean radius requires central_bound_v")
    # c is unused: the empirical radius is not of the log(1/delta) form.
    return 1.0, params.central_bound_v


def _as_sample(values: Sequence[float] | np.ndarray) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"sample must be one-dimensional, got shape {x.shape}")
    if x.size == 0:
        raise InvalidInputError("sample must contain at least one value")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("sample contains NaN or infinite values")
    return x


def _check_delta(delta: float) -> float:
    if not (0.0 < delta < 1.0):
        raise InvalidInputError(f"delta must lie in the open interval (0, 1), got {delta}")
    return -math.log(delta)


def _power(base: float, exponent: float) -> float:
    # exp/log form; zero base maps to zero for the positive exponents used here
    if base == 0.0:
        return 0.0
    return math.exp(exponent * math.log(base))


def empirical_mean(sample) -> float:
    x = _as_sample(sample)
    return math.fsum(x.tolist()) / x.size


def empirical_radius(n: int, delta: float, params: MomentParams) -> float:
    """Deviation ``(3v / (delta n^eps))^(1/(1+eps))`` holding w.p. ``1 - delta``."""
    _check_delta(delta)
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if params.central_bound_v is None:
        raise InvalidInputError("empirical radius requires central_bound_v")
    eps = params.epsilon
    return _power(3.0 * params.central_bound_v / (delta * _power(n, eps)), 1.0 / (1.0 + eps))


def truncation_thresholds(n: int, delta: float, params: MomentParams) -> np.ndarray:
    """Thresholds ``B_t = (u t / log(1/delta))^(1/(1+eps))`` for ``t = 1..n``."""
    log_inv = _check_delta(delta)
    if params.raw_bound_u is None:
        raise InvalidInputError("truncated mean requires raw_bound_u")
    u = params.raw_bound_u
    if u == 0.0:
        return np.zeros(n)
    t = np.arange(1, n + 1, dtype=np.float64)
    return np.exp(np.log(u * t / log_inv) / (1.0 + params.epsilon))


def truncated_mean(sample, delta: float, params: MomentParams) -> float:
    """Mean of the sample with the t-th value zeroed when ``|X_t| > B_t``.

    Not translation invariant: truncation is centred at zero.
    """
    x = _as_sample(sample)
    keep = np.abs(x) <= truncation_thresholds(x.size, delta, params)
    return math.fsum(x[keep].tolist()) / x.size


def mom_block_count(n: int, delta: float) -> int:
    """Number of blocks ``max(1, floor(min(8 log(e^(1/8)/delta), n/2)))``."""
    log_inv = _check_delta(delta)
    return max(1, math.floor(min(8.0 * (0.125 + log_inv), n / 2.0)))


def median_of_means(sample, delta: float) -> float:
    """Median of ``k`` consecutive block means.

    Trailing ``n - k*N`` values are discarded; with an even number of blocks the
    two middle block means are averaged. No moment bound is needed.
    """
    x = _as_sample(sample)
    k = mom_block_count(x.size, delta)
    block = x.size // k
    means = x[: k * block].reshape(k, block).mean(axis=1)
    return float(np.median(means))


def catoni_psi(x):
    """Widest admissible influence function, odd and strictly increasing."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    return np.sign(x) * np.log1p(ax + 0.5 * ax * ax)


def catoni_alpha(n: int, delta: float, v: float) -> float:
    log_inv = _check_delta(delta)
    if not v > 0.0:
        raise InvalidInputError(f"Catoni's estimator needs v > 0, got {v}")
    if not n > 2.0 * log_inv:
        raise PreconditionError(f"Catoni's estimator needs n > 2 log(1/delta) = {2.0 * log_inv:.6g}, got n={n}")
    return math.sqrt(2.0 * log_inv / (n * (v + 2.0 * v * log_inv / (n - 2.0 * log_inv))))


def catoni_tolerance(n: int, alpha: float, spread: float) -> float:
    """Residual tolerance ``1e-9 * n * max(1, alpha * range)`` for the root."""
    return ROOT_RTOL * n * max(1.0, alpha * spread)


@njit(cache=True)
def _psi_sum(values, weights, alpha, m):
    total = 0.0
    for j in range(values.size):
        z = alpha * (values[j] - m)
        if z >= 0.0:
            total += weights[j] * math.log1p(z + 0.5 * z * z)
        else:
            total -= weights[j] * math.log1p(-z + 0.5 * z * z)
    return total


@njit(cache=True)
def _bisect_root(values, weights, alpha, tol, max_iter):
    lo = values[0]
    hi = values[values.size - 1]
    f_lo = _psi_sum(values, weights, alpha, lo)
    if abs(f_lo) <= tol:
        return lo
    f_hi = _psi_sum(values, weights, alpha, hi)
    if abs(f_hi) <= tol:
        return hi
    width = max(hi - lo, 1.0)
    for _ in range(64):
        if f_lo >= 0.0:
            break
        lo -= width
        width *= 2.0
        f_lo = _psi_sum(values, weights, alpha, lo)
    for _ in range(64):
        if f_hi <= 0.0:
            break
        hi += width
        width *= 2.0
        f_hi = _psi_sum(values, weights, alpha, hi)
    if f_lo < 0.0 or f_hi > 0.0:
        return np.nan
    for _ in range(max_iter):
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        f_mid = _psi_sum(values, weights, alpha, mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo if abs(f_lo) <= abs(f_hi) else hi


def catoni_mean_from_counts(values: np.ndarray, counts: np.ndarray, delta: float, params: MomentParams) -> float:
    """Catoni's estimate from sorted distinct values and their multiplicities.

    ``catoni_mean`` reduces to this through ``np.unique``; callers that keep
    the compressed form incrementally get bitwise-identical results.
    """
    if params.epsilon != 1.0:
        raise InvalidInputError(f"Catoni's estimator requires epsilon = 1, got {params.epsilon}")
    if params.central_bound_v is None:
        raise InvalidInputError("Catoni's estimator requires central_bound_v")
    weights = np.asarray(counts, dtype=np.float64)
    n = int(round(weights.sum()))
    alpha = catoni_alpha(n, delta, params.central_bound_v)
    if values.size == 1:
        return float(values[0])
    tol = catoni_tolerance(n, alpha, float(values[-1] - values[0]))
    root = _bisect_root(values, weights, alpha, tol, ROOT_MAX_ITER)
    if not math.isfinite(root):
        raise RuntimeError("Catoni root bracket expansion failed")
    return float(root)


def catoni_mean(sample, delta: float, params: MomentParams) -> float:
    """Root ``m`` of ``sum_i psi(alpha_delta (X_i - m)) = 0`` by bisection.

    Requires ``epsilon = 1``, a variance bound ``v`` and ``n > 2 log(1/delta)``.
    """
    x = _as_sample(sample)
    values, counts = np.unique(x, return_counts=True)
    return catoni_mean_from_counts(values, counts, delta, params)


def catoni_residual(sample, delta: float, params: MomentParams, m: float) -> float:
    x = _as_sample(sample)
    alpha = catoni_alpha(x.size, delta, params.central_bound_v)
    return float(np.sum(catoni_psi(alpha * (x - m))))


def assumption_radius(v: float, c: float, log_inv: float, s: int, epsilon: float) -> float:
    """``v^(1/(1+eps)) (c log_inv / s)^(eps/(1+eps))`` for arbitrary constants."""
    return _power(v, 1.0 / (1.0 + epsilon)) * _power(c * log_inv / s, epsilon / (1.0 + epsilon))


def confidence_radius(spec: EstimatorSpec, s: int, delta: float) -> float:
    """Radius of ``spec``'s estimator from ``s`` samples at level ``delta``.

    Median of means uses ``log(e^(1/8)/delta)`` in place of ``log(1/delta)``.
    """
    if s < 1:
        raise InvalidInputError(f"sample size must be >= 1, got {s}")
    if spec.kind is EstimatorKind.EMPIRICAL:
        return empirical_radius(s, delta, spec.params)
    log_inv = _check_delta(delta)
    if spec.kind is EstimatorKind.MEDIAN_OF_MEANS:
        log_inv += 0.125
    return assumption_radius(spec.v_policy, spec.c_policy, log_inv, s, spec.epsilon)


def estimate(spec: EstimatorSpec, sample, delta: float) -> float:
    """Dispatch to the estimator named by ``spec.kind``."""
    if spec.kind is EstimatorKind.EMPIRICAL:
        return empirical_mean(sample)
    if spec.kind is EstimatorKind.TRUNCATED:
        return truncated_mean(sample, delta, spec.params)
    if spec.kind is EstimatorKind.MEDIAN_OF_MEANS:
        return median_of_means(sample, delta)
    return catoni_mean(sample, delta, spec.params)
