"""Robust UCB policies and robust mean estimators for heavy-tailed bandits."""

from .distributions import (
    BanditInstance,
    Bernoulli,
    Gaussian,
    Pareto,
    Shifted,
    StudentT,
    TwoPoint,
    lemma1_tightness_instance,
    lower_bound_instance,
    lower_bound_pair,
    make_stream,
    moments,
)
from .errors import ConfigError, InvalidInputError, PreconditionError
from .estimators import (
    EstimatorKind,
    EstimatorSpec,
    MomentParams,
    catoni_mean,
    confidence_radius,
    empirical_mean,
    empirical_radius,
    median_of_means,
    truncated_mean,
)
from .policies import BaselineUCB, ModifiedRobustUCB, RobustUCB

__version__ = "0.1.0"
