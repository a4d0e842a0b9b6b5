"""Monte Carlo experiments, artifact writers and the command line interface."""

from .config import ExperimentConfig, FactorSettings, config_from_dict, load_config
from .runners import (
    ExperimentResult,
    cell_seed,
    run_compare_mp_experiment,
    run_esd_experiment,
    run_experiment,
    run_factor_demo,
    run_lambda_max_experiment,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "FactorSettings",
    "cell_seed",
    "config_from_dict",
    "load_config",
    "run_compare_mp_experiment",
    "run_esd_experiment",
    "run_experiment",
    "run_factor_demo",
    "run_lambda_max_experiment",
]
