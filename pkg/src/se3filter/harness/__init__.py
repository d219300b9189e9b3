"""Scenario configuration, seeded Monte Carlo runs and CSV outputs."""

from .config import SimConfig, dumps, load_config, loads, reference_config
from .outputs import emit_outputs
from .runner import RunRecord, SummaryStats, run_montecarlo, run_once

__all__ = [
    "RunRecord",
    "SimConfig",
    "SummaryStats",
    "dumps",
    "emit_outputs",
    "load_config",
    "loads",
    "reference_config",
    "run_montecarlo",
    "run_once",
]
