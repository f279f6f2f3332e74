"""Monte Carlo check of an estimator's two-sided deviation guarantee.

Each trial draws ``n`` values from the stream ``(seed, trial, 0)`` and records
whether the estimate overshoots or undershoots the true mean by more than the
threshold. The threshold is the estimator's confidence radius at ``delta``, or
a fixed deviation ``eta`` (the empirical-mean tail check).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..distributions import ArmDistribution, make_stream, moments
from ..errors import ConfigError
from ..estimators import EstimatorKind, EstimatorSpec, confidence_radius, empirical_radius, estimate
from .runner import resolve_workers

__all__ = ["ConcentrationReport", "empirical_tail_bound", "check_moment_assumption", "run_concentration"]

_MOMENT_RTOL = 1e-6


@dataclass(frozen=True)
class ConcentrationReport:
    spec: EstimatorSpec
    distribution: ArmDistribution
    n: int
    delta: float | None
    eta: float | None
    threshold: float
    trials: int
    upper_violations: int
    lower_violations: int
    nominal: float  # probability the rates are compared against

    @property
    def upper_rate(self) -> float:
        return self.upper_violations / self.trials

    @property
    def lower_rate(self) -> float:
        return self.lower_violations / self.trials

    @property
    def std_error(self) -> float:
        """Binomial standard error at the nominal level."""
        p = min(self.nominal, 1.0)
        return math.sqrt(p * (1.0 - p) / self.trials)

    def within(self, n_se: float = 3.0) -> bool:
        limit = self.nominal + n_se * self.std_error
        return self.upper_rate <= limit and self.lower_rate <= limit

    def to_dict(self) -> dict:
        return {
            "estimator": self.spec.kind.value,
            "distribution": repr(self.distribution),
            "n": self.n,
            "delta": self.delta,
            "eta": self.eta,
            "threshold": self.threshold,
            "trials": self.trials,
            "upper_violations": self.upper_violations,
            "lower_violations": self.lower_violations,
            "upper_rate": self.upper_rate,
            "lower_rate": self.lower_rate,
            "nominal": self.nominal,
            "std_error": self.std_error,
        }


def empirical_tail_bound(n: int, eta: float, v: float, epsilon: float) -> float:
    """``3 v / (n^eps eta^(1+eps))`` bounding ``P(mean - mu > eta)``."""
    return 3.0 * v / (n**epsilon * eta ** (1.0 + epsilon))


def check_moment_assumption(spec: EstimatorSpec, dist: ArmDistribution):
    """Reject runs whose assumed moment bound is below the law's true moment."""
    m = moments(dist, spec.epsilon)
    if spec.kind is EstimatorKind.TRUNCATED:
        name, assumed, actual = "raw_bound_u", spec.params.raw_bound_u, m.raw
    else:
        name, assumed, actual = "central_bound_v", spec.params.central_bound_v, m.central
    if not actual <= assumed * (1.0 + _MOMENT_RTOL):
        raise ConfigError(f"assumed bound {assumed} is below the distribution's moment {actual}", name)
    return m


def _count(args) -> tuple[int, int]:
    spec, dist, n, delta, mu, threshold, seed, trials = args
    upper = lower = 0
    for trial in trials:
        x = dist.draw(make_stream(seed, trial, 0), n)
        est = estimate(spec, x, delta)
        upper += est > mu + threshold
        lower += est < mu - threshold
    return upper, lower


def run_concentration(
    spec: EstimatorSpec,
    dist: ArmDistribution,
    n: int,
    trials: int,
    seed: int,
    delta: float | None = None,
    eta: float | None = None,
    workers: int | None = None,
) -> ConcentrationReport:
    """Count upper- and lower-tail violations over ``trials`` independent samples.

    Give exactly one of ``delta`` (threshold = confidence radius) or ``eta``
    (fixed threshold, empirical mean only, compared against the polynomial tail
    bound).
    """
    if (delta is None) == (eta is None):
        raise ConfigError("give exactly one of delta or eta")
    if n < 1 or trials < 1:
        raise ConfigError(f"need n >= 1 and trials >= 1, got n={n}, trials={trials}")
    m = check_moment_assumption(spec, dist)
    if eta is not None:
        if spec.kind is not EstimatorKind.EMPIRICAL:
            raise ConfigError("a fixed deviation eta is only supported for the empirical mean", "eta")
        if not eta > 0.0:
            raise ConfigError("must be positive", "eta")
        threshold = eta
        nominal = empirical_tail_bound(n, eta, spec.params.central_bound_v, spec.epsilon)
        est_delta = 0.5
    else:
        if not 0.0 < delta < 1.0:
            raise ConfigError("must lie in (0, 1)", "delta")
        if spec.kind is EstimatorKind.EMPIRICAL:
            threshold = empirical_radius(n, delta, spec.params)
        else:
            threshold = confidence_radius(spec, n, delta)
        nominal = delta
        est_delta = delta
    workers = resolve_workers(workers)
    idx = list(range(trials))
    if workers == 1:
        upper, lower = _count((spec, dist, n, est_delta, m.mean, threshold, seed, idx))
    else:
        jobs = [(spec, dist, n, est_delta, m.mean, threshold, seed, idx[w::workers]) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_count, jobs))
        upper, lower = sum(c[0] for c in counts), sum(c[1] for c in counts)
    return ConcentrationReport(spec, dist, n, delta, eta, threshold, trials, int(upper), int(lower), nominal)
