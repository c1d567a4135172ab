from .config import ExperimentConfig, load_config
from .io import emit, emit_run, emit_table, parse
from .runner import RunSummary, aggregate, compare, run, sweep

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "aggregate",
    "compare",
    "emit",
    "emit_run",
    "emit_table",
    "load_config",
    "parse",
    "run",
    "sweep",
]
