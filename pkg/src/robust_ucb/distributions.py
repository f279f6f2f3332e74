"""Reward laws with known means and (1+eps)-moments, and random streams.

Closed-form inverse-CDF sampling is used for Bernoulli, two-point and Pareto
laws, so two instances that differ only by a shift consume identical draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, special, stats

from .errors import ConfigError, InvalidInputError

__all__ = [
    "ArmDistribution",
    "Bernoulli",
    "TwoPoint",
    "Pareto",
    "StudentT",
    "Gaussian",
    "Shifted",
    "Moments",
    "BanditInstance",
    "make_stream",
    "sample",
    "moments",
    "lower_bound_pair",
    "lower_bound_instance",
    "lemma1_tightness_instance",
    "distribution_from_dict",
    "distribution_to_dict",
]

_QUAD_RTOL = 1e-8


class Moments(NamedTuple):
    mean: float
    raw: float
    central: float


def make_stream(master_seed: int, repetition: int, arm: int) -> np.random.Generator:
    """Counter-based (Philox) stream for one (seed, repetition, arm) triple."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(repetition), int(arm)))
    return np.random.Generator(np.random.Philox(seq))


class ArmDistribution:
    """Base class; subclasses are frozen dataclasses."""

    law = ""

    def mean(self) -> float:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def tail_exponent(self) -> float:
        """Sup of the moment orders ``p`` with ``E|X|^p`` finite."""
        return math.inf

    def atoms(self) -> list[tuple[float, float]] | None:
        """``[(point, mass), ...]`` for discrete laws, else ``None``."""
        return None

    def _pdf_and_kinks(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Bernoulli(ArmDistribution):
    p: float
    law = "bernoulli"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError(f"Bernoulli p must lie in [0, 1], got {self.p}")

    def mean(self):
        return self.p

    def draw(self, rng, size):
        return (rng.random(size) < self.p).astype(np.float64)

    def atoms(self):
        return [(0.0, 1.0 - self.p), (1.0, self.p)]


@dataclass(frozen=True)
class TwoPoint(ArmDistribution):
    """Mass ``p_hi`` at ``hi`` and the rest at zero."""

    p_hi: float
    hi: float
    law = "two_point"

    def __post_init__(self):
        if not 0.0 <= self.p_hi <= 1.0:
            raise InvalidInputError(f"two-point p_hi must lie in [0, 1], got {self.p_hi}")
        if not math.isfinite(self.hi):
            raise InvalidInputError(f"two-point hi must be finite, got {self.hi}")

    def mean(self):
        return self.p_hi * self.hi

    def draw(self, rng, size):
        return np.where(rng.random(size) < self.p_hi, self.hi, 0.0)

    def atoms(self):
        return [(0.0, 1.0 - self.p_hi), (self.hi, self.p_hi)]


@dataclass(frozen=True)
class Pareto(ArmDistribution):
    shape: float
    scale: float = 1.0
    law = "pareto"

    def __post_init__(self):
        if not self.shape > 1.0:
            raise InvalidInputError(f"Pareto shape must exceed 1 for a finite mean, got {self.shape}")
        if not self.scale > 0.0:
            raise InvalidInputError(f"Pareto scale must be positive, got {self.scale}")

    def mean(self):
        return self.shape * self.scale / (self.shape - 1.0)

    def draw(self, rng, size):
        # 1 - U lies in (0, 1]
        return self.scale * (1.0 - rng.random(size)) ** (-1.0 / self.shape)

    def tail_exponent(self):
        return self.shape

    def raw_moment(self, p: float) -> float:
        if p >= self.shape:
            return math.inf
        return self.shape * self.scale**p / (self.shape - p)

    def _pdf_and_kinks(self):
        return stats.pareto(self.shape, scale=self.scale).pdf, (self.scale, math.inf)


@dataclass(frozen=True)
class StudentT(ArmDistribution):
    dof: float
    law = "student_t"

    def __post_init__(self):
        if not self.dof > 1.0:
            raise InvalidInputError(f"Student-t dof must exceed 1 for a finite mean, got {self.dof}")

    def mean(self):
        return 0.0

    def draw(self, rng, size):
        return rng.standard_t(self.dof, size)

    def tail_exponent(self):
        return self.dof

    def _pdf_and_kinks(self):
        return stats.t(self.dof).pdf, (-math.inf, math.inf)


@dataclass(frozen=True)
class Gaussian(ArmDistribution):
    mu: float = 0.0
    variance: float = 1.0
    law = "gaussian"

    def __post_init__(self):
        if not self.variance > 0.0:
            raise InvalidInputError(f"Gaussian variance must be positive, got {self.variance}")

    def mean(self):
        return self.mu

    def draw(self, rng, size):
        return self.mu + math.sqrt(self.variance) * rng.standard_normal(size)

    def central_moment(self, p: float) -> float:
        if p == 2.0:
            return self.variance
        sigma = math.sqrt(self.variance)
        return sigma**p * 2.0 ** (p / 2.0) * special.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)

    def _pdf_and_kinks(self):
        return stats.norm(self.mu, math.sqrt(self.variance)).pdf, (-math.inf, math.inf)


@dataclass(frozen=True)
class Shifted(ArmDistribution):
    inner: ArmDistribution
    offset: float
    law = "shifted"

    def mean(self):
        return self.inner.mean() + self.offset

    def draw(self, rng, size):
        return self.inner.draw(rng, size) + self.offset

    def tail_exponent(self):
        return self.inner.tail_exponent()

    def atoms(self):
        inner = self.inner.atoms()
        if inner is None:
            return None
        return [(x + self.offset, w) for x, w in inner]

    def _pdf_and_kinks(self):
        pdf, (lo, hi) = self.inner._pdf_and_kinks()
        return (lambda x: pdf(x - self.offset)), (lo + self.offset, hi + self.offset)


def sample(dist: ArmDistribution, rng: np.random.Generator, size: int | None = None):
    """One draw (``size=None``) or an array of ``size`` draws from ``dist``."""
    if size is None:
        return float(dist.draw(rng, 1)[0])
    return dist.draw(rng, size)


def _abs_moment(dist: ArmDistribution, center: float, p: float) -> float:
    """``E|X - center|^p`` by exact sums or adaptive quadrature."""
    atoms = dist.atoms()
    if atoms is not None:
        return math.fsum(w * abs(x - center) ** p for x, w in atoms if w > 0.0)
    if p >= dist.tail_exponent():
        return math.inf
    pdf, (lo, hi) = dist._pdf_and_kinks()
    cuts = sorted({lo, hi, center} | ({0.0} if lo < 0.0 < hi else set()))
    cuts = [c for c in cuts if lo <= c <= hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        value, _ = integrate.quad(lambda x: abs(x - center) ** p * pdf(x), a, b, epsrel=_QUAD_RTOL, epsabs=0.0, limit=200)
        total += value
    return total


def moments(dist: ArmDistribution, epsilon: float) -> Moments:
    """Mean, ``E|X|^(1+eps)`` and ``E|X-mu|^(1+eps)`` (``inf`` when divergent)."""
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1], got {epsilon}")
    p = 1.0 + epsilon
    mu = dist.mean()
    if isinstance(dist, Pareto):
        raw = dist.raw_moment(p)
    elif isinstance(dist, Gaussian) and p == 2.0:
        raw = dist.mu**2 + dist.variance
    else:
        raw = _abs_moment(dist, 0.0, p)
    if isinstance(dist, Gaussian):
        central = dist.central_moment(p)
    elif isinstance(dist, Shifted) and dist.inner.atoms() is None:
        central = moments(dist.inner, epsilon).central
    else:
        central = _abs_moment(dist, mu, p)
    return Moments(float(mu), float(raw), float(central))


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[ArmDistribution, ...]
    means: tuple[float, ...] = field(init=False)
    gaps: tuple[float, ...] = field(init=False)
    mu_star: float = field(init=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        if len(arms) < 2:
            raise InvalidInputError(f"a bandit instance needs K >= 2 arms, got {len(arms)}")
        means = tuple(float(a.mean()) for a in arms)
        mu_star = max(means)
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "mu_star", mu_star)
        object.__setattr__(self, "gaps", tuple(mu_star - m for m in means))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def shifted(self, offset: float) -> "BanditInstance":
        return BanditInstance(tuple(Shifted(a, offset) for a in self.arms))


def lower_bound_pair(delta_gap: float, epsilon: float) -> tuple[TwoPoint, TwoPoint]:
    """Two laws with raw (1+eps)-moment at most 1 whose means differ by ``delta_gap``.

    With ``gamma = (2 delta_gap)^(1/eps)`` both put their mass off zero at
    ``1/gamma``: ``gamma^(1+eps)`` for the better arm and
    ``gamma^(1+eps) - delta_gap * gamma`` for the worse one.
    """
    if not 0.0 < delta_gap < 0.25:
        raise InvalidInputError(f"gap must lie in (0, 1/4), got {delta_gap}")
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1], got {epsilon}")
    gamma = (2.0 * delta_gap) ** (1.0 / epsilon)
    mass = gamma ** (1.0 + epsilon)
    return TwoPoint(mass, 1.0 / gamma), TwoPoint(mass - delta_gap * gamma, 1.0 / gamma)


def lower_bound_instance(delta_gap: float, epsilon: float, n_arms: int = 2) -> BanditInstance:
    """One copy of the better law followed by ``n_arms - 1`` copies of the worse one."""
    best, worse = lower_bound_pair(delta_gap, epsilon)
    return BanditInstance((best,) + (worse,) * (n_arms - 1))


def lemma1_tightness_instance(n: int, eta: float, epsilon: float) -> TwoPoint:
    """Two-point law on which the empirical mean's polynomial tail is attained.

    ``gamma = 1/(2 n eta)``, mass ``gamma^(1+eps)`` at ``1/gamma``. Requires
    ``eta > n^(-eps/(1+eps))``.
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1], got {epsilon}")
    if n < 1 or not eta > n ** (-epsilon / (1.0 + epsilon)):
        raise InvalidInputError(f"need eta > n^(-eps/(1+eps)) = {n ** (-epsilon / (1.0 + epsilon)):.6g}, got eta={eta}")
    gamma = 1.0 / (2.0 * n * eta)
    return TwoPoint(gamma ** (1.0 + epsilon), 1.0 / gamma)


_LAWS = {
    "bernoulli": (Bernoulli, ("p",)),
    "two_point": (TwoPoint, ("p_hi", "hi")),
    "pareto": (Pareto, ("shape", "scale")),
    "student_t": (StudentT, ("dof",)),
    "gaussian": (Gaussian, ("mean", "variance")),
}


def distribution_from_dict(record: dict, where: str = "distribution") -> ArmDistribution:
    """Parse a ``{"law": ..., "params": {...}}`` record; unknown keys are rejected."""
    if not isinstance(record, dict):
        raise ConfigError("expected an object with 'law' and 'params'", where)
    extra = set(record) - {"law", "params"}
    if extra:
        raise ConfigError(f"unknown field {sorted(extra)[0]!r}", f"{where}.{sorted(extra)[0]}")
    law = record.get("law")
    params = record.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object", f"{where}.params")
    if law == "shifted":
        unknown = set(params) - {"inner", "offset"}
        if unknown:
            raise ConfigError("unknown field", f"{where}.params.{sorted(unknown)[0]}")
        if "inner" not in params or "offset" not in params:
            raise ConfigError("shifted needs 'inner' and 'offset'", f"{where}.params")
        inner = distribution_from_dict(params["inner"], f"{where}.params.inner")
        return Shifted(inner, float(params["offset"]))
    if law not in _LAWS:
        raise ConfigError(f"unknown law {law!r}; expected one of {sorted(_LAWS) + ['shifted']}", f"{where}.law")
    cls, names = _LAWS[law]
    unknown = set(params) - set(names)
    if unknown:
        raise ConfigError("unknown field", f"{where}.params.{sorted(unknown)[0]}")
    try:
        kwargs = {("mu" if k == "mean" else k): float(v) for k, v in params.items()}
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), f"{where}.params") from exc


def distribution_to_dict(dist: ArmDistribution) -> dict:
    if isinstance(dist, Shifted):
        return {"law": "shifted", "params": {"inner": distribution_to_dict(dist.inner), "offset": dist.offset}}
    _, names = _LAWS[dist.law]
    return {"law": dist.law, "params": {k: getattr(dist, "mu" if k == "mean" else k) for k in names}}
