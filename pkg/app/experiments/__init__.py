from app.experiments.models import CSV_COLUMNS, ConfigFile, ExperimentSpec, Report, parse_experiment
from app.experiments.runner import (
    ReplayResult,
    check_config_file,
    prepare,
    replay,
    run_experiment,
    simulate,
    sweep,
    sweep_threads,
    system_for,
)
from app.experiments.validate import SUITES, Check, validate

__all__ = [
    "CSV_COLUMNS", "ConfigFile", "ExperimentSpec", "Report", "parse_experiment",
    "ReplayResult", "check_config_file", "prepare", "replay", "run_experiment", "simulate", "sweep",
    "sweep_threads", "system_for",
    "SUITES", "Check", "validate",
]
