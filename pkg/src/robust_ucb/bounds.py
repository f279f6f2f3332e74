"""Closed-form regret bounds, expected-pull bounds and lower-bound values.

All logs are natural. Gap-dependent sums run over suboptimal arms only
(``gap > 0``). The lower-bound values are reference quantities: the gap-dependent
one is an asymptotic coefficient of ``log n``, not a finite-horizon guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable

from .errors import InvalidInputError, PreconditionError

__all__ = [
    "BoundInput",
    "prop1_gap_bound",
    "prop1_free_bound",
    "expected_pulls_bound",
    "thm_truncated_bound",
    "thm_mom_bound",
    "thm_catoni_bound",
    "lower_gap_coefficient",
    "lower_free_bound",
    "BOUNDS",
    "evaluate",
]


@dataclass(frozen=True)
class BoundInput:
    n: float
    gaps: tuple[float, ...] = ()
    epsilon: float = 1.0
    c: float | None = None
    u: float | None = None
    v: float | None = None
    K: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gaps", tuple(float(g) for g in self.gaps))
        if not self.n >= 1:
            raise InvalidInputError(f"horizon n must be >= 1, got {self.n}")
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidInputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if any(not g >= 0.0 for g in self.gaps):
            raise InvalidInputError(f"gaps must be nonnegative, got {self.gaps}")
        if self.K is not None and self.K < 2:
            raise InvalidInputError(f"K must be >= 2, got {self.K}")
        for name in ("c", "u", "v"):
            value = getattr(self, name)
            if value is not None and not value >= 0.0:
                raise InvalidInputError(f"{name} must be nonnegative, got {value}")

    def need(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise InvalidInputError(f"this bound needs parameter {name!r}")
        return value

    def suboptimal(self) -> list[float]:
        return [g for g in self.gaps if g > 0.0]


def _log_term(coef: float, base: float, power: float, log_n: float) -> float:
    """``coef * base^power * log n``, zero at ``n = 1`` and infinite on overflow."""
    if log_n == 0.0 or coef == 0.0:
        return 0.0
    try:
        return coef * base**power * log_n
    except OverflowError:
        return math.inf


def prop1_gap_bound(b: BoundInput) -> float:
    """``sum_i [2c (v/gap_i)^(1/eps) log n + 5 gap_i]`` over suboptimal arms."""
    c, v, eps = b.need("c"), b.need("v"), b.epsilon
    log_n = math.log(b.n)
    return math.fsum(_log_term(2.0 * c, v / g, 1.0 / eps, log_n) + 5.0 * g for g in b.suboptimal())


def prop1_free_bound(b: BoundInput) -> float:
    """``n^(1/(1+eps)) (4 K c log n)^(eps/(1+eps)) v^(1/(1+eps))``.

    Valid only when ``log n >= 5 gap^((1+eps)/eps) / (2 c v^(1/eps))`` for every
    gap; ``K`` defaults to the number of gaps.
    """
    c, v, eps = b.need("c"), b.need("v"), b.epsilon
    k = b.K if b.K is not None else len(b.gaps)
    if k < 1:
        raise InvalidInputError("prop1_free_bound needs K or a list of gaps")
    log_n = math.log(b.n)
    for i, g in enumerate(b.gaps):
        if g > 0.0:
            need = 5.0 * g ** ((1.0 + eps) / eps) / (2.0 * c * v ** (1.0 / eps)) if v > 0.0 else math.inf
            if log_n < need:
                raise PreconditionError(
                    f"gap {i} = {g}: log n = {log_n:.6g} is below the validity threshold {need:.6g}"
                )
    return b.n ** (1.0 / (1.0 + eps)) * (4.0 * k * c * log_n) ** (eps / (1.0 + eps)) * v ** (1.0 / (1.0 + eps))


def expected_pulls_bound(gap: float, c: float, v: float, epsilon: float, n: float) -> float:
    """Bound ``2c v^(1/eps) gap^(-(1+eps)/eps) log n + 5`` on the pulls of a suboptimal arm."""
    if not gap > 0.0:
        raise InvalidInputError(f"gap must be positive, got {gap}")
    return 2.0 * c * v ** (1.0 / epsilon) / gap ** ((1.0 + epsilon) / epsilon) * math.log(n) + 5.0


def thm_truncated_bound(b: BoundInput) -> float:
    u, eps = b.need("u"), b.epsilon
    log_n = math.log(b.n)
    return math.fsum(_log_term(8.0, 4.0 * u / g, 1.0 / eps, log_n) + 5.0 * g for g in b.suboptimal())


def thm_mom_bound(b: BoundInput) -> float:
    v, eps = b.need("v"), b.epsilon
    log_n = math.log(b.n)
    return math.fsum(_log_term(32.0, 12.0 * v / g, 1.0 / eps, log_n) + 5.0 * g for g in b.suboptimal())


def thm_catoni_bound(b: BoundInput) -> float:
    if b.epsilon != 1.0:
        raise InvalidInputError("the Catoni bound is stated for epsilon = 1 only")
    v = b.need("v")
    log_n = math.log(b.n)
    return math.fsum(_log_term(8.0, v / g, 1.0, log_n) + 8.0 * g * log_n + 5.0 * g for g in b.suboptimal())


def lower_gap_coefficient(delta_gap: float, epsilon: float) -> float:
    """Asymptotic lower bound ``0.4 / gap^(1/eps)`` on ``liminf R_n / log n``."""
    if not 0.0 < delta_gap < 0.25:
        raise InvalidInputError(f"gap must lie in (0, 1/4), got {delta_gap}")
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1], got {epsilon}")
    return 0.4 / delta_gap ** (1.0 / epsilon)


def lower_free_bound(K: int, n: float, epsilon: float) -> float:
    """Minimax lower bound ``0.01 K^(eps/(1+eps)) n^(1/(1+eps))``."""
    if K < 1 or not n >= 1:
        raise InvalidInputError(f"need K >= 1 and n >= 1, got K={K}, n={n}")
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1], got {epsilon}")
    return 0.01 * K ** (epsilon / (1.0 + epsilon)) * n ** (1.0 / (1.0 + epsilon))


def _from_input(fn: Callable[[BoundInput], float]):
    def run(params: dict) -> float:
        names = {f.name for f in fields(BoundInput)}
        unknown = set(params) - names
        if unknown:
            raise InvalidInputError(f"unknown parameter {sorted(unknown)[0]!r}")
        return fn(BoundInput(**params))

    return run


def _pulls(params: dict) -> float:
    return expected_pulls_bound(params["gap"], params["c"], params["v"], params.get("epsilon", 1.0), params["n"])


BOUNDS: dict[str, Callable[[dict], float]] = {
    "prop1_gap": _from_input(prop1_gap_bound),
    "prop1_free": _from_input(prop1_free_bound),
    "truncated": _from_input(thm_truncated_bound),
    "mom": _from_input(thm_mom_bound),
    "catoni": _from_input(thm_catoni_bound),
    "pulls": _pulls,
    "lower_gap": lambda p: lower_gap_coefficient(p["delta_gap"], p.get("epsilon", 1.0)),
    "lower_free": lambda p: lower_free_bound(p["K"], p["n"], p.get("epsilon", 1.0)),
}


def evaluate(which: str, params: dict) -> float:
    """Evaluate the bound registered under ``which`` with keyword ``params``."""
    if which not in BOUNDS:
        raise InvalidInputError(f"unknown bound {which!r}; choose from {sorted(BOUNDS)}")
    try:
        return BOUNDS[which](dict(params))
    except KeyError as exc:
        raise InvalidInputError(f"missing parameter {exc.args[0]!r} for bound {which!r}") from exc
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from exc
