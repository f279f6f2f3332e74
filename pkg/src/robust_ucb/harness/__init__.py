"""Experiment runner, concentration bench, config/result I/O and CLI."""

from .concentration import ConcentrationReport, run_concentration
from .config import ExperimentConfig, config_from_dict, config_to_dict, dump_config, load_config
from .io import write_trace
from .runner import RegretTrace, run_experiment

__all__ = [
    "ConcentrationReport",
    "ExperimentConfig",
    "RegretTrace",
    "config_from_dict",
    "config_to_dict",
    "dump_config",
    "load_config",
    "run_concentration",
    "run_experiment",
    "write_trace",
]
