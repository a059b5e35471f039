from .config import ExperimentConfig, load_config, parse_config
from .experiment import Cell, RunSummary, build_problem, expand_grid, run_experiment

__all__ = [
    "Cell",
    "ExperimentConfig",
    "RunSummary",
    "build_problem",
    "expand_grid",
    "load_config",
    "parse_config",
    "run_experiment",
]
