"""Experiment configuration: JSON schema, validation and round-tripping.

Schema (unknown keys are rejected at every level)::

    {
      "instance": {"arms": [{"law": "pareto", "params": {"shape": 2.2, "scale": 1.0}}, ...]}
               | {"lower_bound": {"delta_gap": 0.2, "epsilon": 1.0, "num_arms": 2}},
      "policy": {"variant": "robust_ucb" | "modified_robust_ucb",
                 "estimator": {"kind": "truncated" | "median_of_means" | "catoni" | "empirical",
                               "epsilon": 1.0, "raw_bound_u": 1.0, "central_bound_v": 1.0}}
              | {"variant": "baseline_ucb", "variance_factor": 0.25},
      "horizon": 20000,
      "repetitions": 200,
      "master_seed": 20131101,
      "output": {"path": "results/run.csv", "format": "csv" | "json"},   # optional
      "checkpoints": [1, 10, 100, ...],                                 # optional
      "record_arms": false                                              # optional
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..distributions import BanditInstance, distribution_from_dict, distribution_to_dict, lower_bound_instance
from ..errors import ConfigError, InvalidInputError
from ..estimators import EstimatorKind, EstimatorSpec, MomentParams
from ..policies import BaselineUCB, ModifiedRobustUCB, RobustUCB

__all__ = [
    "VARIANTS",
    "PolicyConfig",
    "OutputConfig",
    "ExperimentConfig",
    "default_checkpoints",
    "parse_estimator",
    "estimator_to_dict",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "dump_config",
]

VARIANTS = ("robust_ucb", "modified_robust_ucb", "baseline_ucb")
FORMATS = ("csv", "json")
DEFAULT_CHECKPOINTS = 50
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class PolicyConfig:
    variant: str
    estimator: EstimatorSpec | None = None
    variance_factor: float | None = None

    def build(self, n_arms: int):
        if self.variant == "baseline_ucb":
            return BaselineUCB(self.variance_factor, n_arms)
        if self.variant == "modified_robust_ucb":
            return ModifiedRobustUCB(self.estimator.params.central_bound_v, n_arms)
        return RobustUCB(self.estimator, n_arms)


@dataclass(frozen=True)
class OutputConfig:
    path: str
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policy: PolicyConfig
    horizon: int
    repetitions: int
    master_seed: int
    output: OutputConfig | None = None
    checkpoints: tuple[int, ...] = ()
    record_arms: bool = False
    instance_source: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.checkpoints:
            object.__setattr__(self, "checkpoints", default_checkpoints(self.horizon))


def default_checkpoints(horizon: int, count: int = DEFAULT_CHECKPOINTS) -> tuple[int, ...]:
    """Geometric grid of about ``count`` rounds from 1 to ``horizon`` inclusive."""
    grid = np.unique(np.rint(np.geomspace(1, horizon, count)).astype(np.int64))
    return tuple(int(t) for t in grid)


def _reject_unknown(record: dict, allowed: set[str], where: str):
    if not isinstance(record, dict):
        raise ConfigError("expected a JSON object", where or None)
    for key in sorted(set(record) - allowed):
        raise ConfigError("unknown field", f"{where}.{key}" if where else key)


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise ConfigError("missing required field", f"{where}.{key}" if where else key)
    return record[key]


def _as_int(value, where: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", where)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", where)
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", where)
    return float(value)


def parse_estimator(record: dict, where: str = "policy.estimator") -> EstimatorSpec:
    _reject_unknown(record, {"kind", "epsilon", "raw_bound_u", "central_bound_v"}, where)
    kind = _require(record, "kind", where)
    if kind not in {k.value for k in EstimatorKind}:
        raise ConfigError(f"unknown estimator kind {kind!r}", f"{where}.kind")
    bounds = {}
    for key in ("raw_bound_u", "central_bound_v"):
        if key in record:
            bounds[key] = _as_float(record[key], f"{where}.{key}")
    try:
        params = MomentParams(_as_float(record.get("epsilon", 1.0), f"{where}.epsilon"), **bounds)
        return EstimatorSpec.build(kind, params)
    except InvalidInputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), where) from exc


def estimator_to_dict(spec: EstimatorSpec) -> dict:
    record = {"kind": spec.kind.value, "epsilon": spec.params.epsilon}
    if spec.params.raw_bound_u is not None:
        record["raw_bound_u"] = spec.params.raw_bound_u
    if spec.params.central_bound_v is not None:
        record["central_bound_v"] = spec.params.central_bound_v
    return record


def _parse_policy(record: dict) -> PolicyConfig:
    where = "policy"
    _reject_unknown(record, {"variant", "estimator", "variance_factor"}, where)
    variant = _require(record, "variant", where)
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {list(VARIANTS)}", f"{where}.variant")
    if variant == "baseline_ucb":
        if "estimator" in record:
            raise ConfigError("baseline_ucb takes no estimator", f"{where}.estimator")
        vf = _as_float(_require(record, "variance_factor", where), f"{where}.variance_factor")
        if vf <= 0.0:
            raise ConfigError("must be positive", f"{where}.variance_factor")
        return PolicyConfig(variant, variance_factor=vf)
    if "variance_factor" in record:
        raise ConfigError(f"{variant} takes no variance_factor", f"{where}.variance_factor")
    spec = parse_estimator(_require(record, "estimator", where))
    if variant == "modified_robust_ucb" and spec.kind is not EstimatorKind.CATONI:
        raise ConfigError("modified_robust_ucb requires the catoni estimator", f"{where}.estimator.kind")
    if variant == "robust_ucb" and spec.kind is EstimatorKind.CATONI:
        raise ConfigError("the catoni estimator needs the sample-size gate; use modified_robust_ucb", f"{where}.variant")
    return PolicyConfig(variant, estimator=spec)


def _parse_instance(record: dict) -> BanditInstance:
    where = "instance"
    _reject_unknown(record, {"arms", "lower_bound"}, where)
    if ("arms" in record) == ("lower_bound" in record):
        raise ConfigError("give exactly one of 'arms' or 'lower_bound'", where)
    try:
        if "arms" in record:
            arms = record["arms"]
            if not isinstance(arms, list):
                raise ConfigError("expected a list", f"{where}.arms")
            return BanditInstance(tuple(distribution_from_dict(a, f"{where}.arms[{i}]") for i, a in enumerate(arms)))
        lb = record["lower_bound"]
        sub = f"{where}.lower_bound"
        _reject_unknown(lb, {"delta_gap", "epsilon", "num_arms"}, sub)
        return lower_bound_instance(
            _as_float(_require(lb, "delta_gap", sub), f"{sub}.delta_gap"),
            _as_float(lb.get("epsilon", 1.0), f"{sub}.epsilon"),
            _as_int(lb.get("num_arms", 2), f"{sub}.num_arms", 2),
        )
    except ConfigError:
        raise
    except InvalidInputError as exc:
        raise ConfigError(str(exc), where) from exc


def config_from_dict(record: dict) -> ExperimentConfig:
    allowed = {"instance", "policy", "horizon", "repetitions", "master_seed", "output", "checkpoints", "record_arms"}
    _reject_unknown(record, allowed, "")
    instance_source = _require(record, "instance", "")
    instance = _parse_instance(instance_source)
    policy = _parse_policy(_require(record, "policy", ""))
    horizon = _as_int(_require(record, "horizon", ""), "horizon", 1)
    if horizon < instance.n_arms:
        raise ConfigError(f"horizon must be >= K = {instance.n_arms}", "horizon")
    repetitions = _as_int(_require(record, "repetitions", ""), "repetitions", 1)
    seed = _as_int(_require(record, "master_seed", ""), "master_seed", 0)
    if seed > MAX_SEED:
        raise ConfigError("must fit in 64 bits", "master_seed")
    output = None
    if record.get("output") is not None:
        out = record["output"]
        _reject_unknown(out, {"path", "format"}, "output")
        path = _require(out, "path", "output")
        if not isinstance(path, str) or not path:
            raise ConfigError("expected a non-empty string", "output.path")
        fmt = out.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"format must be one of {list(FORMATS)}", "output.format")
        output = OutputConfig(path, fmt)
    checkpoints = ()
    if record.get("checkpoints") is not None:
        raw = record["checkpoints"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("expected a non-empty list of rounds", "checkpoints")
        checkpoints = tuple(_as_int(c, "checkpoints", 1) for c in raw)
        if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
            raise ConfigError("must be strictly increasing", "checkpoints")
        if checkpoints[-1] > horizon:
            raise ConfigError(f"last checkpoint {checkpoints[-1]} exceeds the horizon {horizon}", "checkpoints")
    record_arms = record.get("record_arms", False)
    if not isinstance(record_arms, bool):
        raise ConfigError("expected true or false", "record_arms")
    return ExperimentConfig(
        instance=instance,
        policy=policy,
        horizon=horizon,
        repetitions=repetitions,
        master_seed=seed,
        output=output,
        checkpoints=checkpoints,
        record_arms=record_arms,
        instance_source=instance_source,
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    policy: dict = {"variant": config.policy.variant}
    if config.policy.estimator is not None:
        policy["estimator"] = estimator_to_dict(config.policy.estimator)
    if config.policy.variance_factor is not None:
        policy["variance_factor"] = config.policy.variance_factor
    record = {
        "instance": {"arms": [distribution_to_dict(a) for a in config.instance.arms]},
        "policy": policy,
        "horizon": config.horizon,
        "repetitions": config.repetitions,
        "master_seed": config.master_seed,
        "checkpoints": list(config.checkpoints),
        "record_arms": config.record_arms,
    }
    if config.output is not None:
        record["output"] = {"path": config.output.path, "format": config.output.format}
    return record


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return config_from_dict(record)


def dump_config(config: ExperimentConfig, path: str | Path):
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(config_to_dict(config), indent=2) + "\n")
