from .config import ScenarioConfig, ConfigError, load_config
from .trial import TraceRecord, RunSummary, run_trial, make_classifier
from .suite import run_suite, SuiteReport
from .trace import write_trace, read_trace, emit_plots

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "load_config",
    "TraceRecord",
    "RunSummary",
    "run_trial",
    "make_classifier",
    "run_suite",
    "SuiteReport",
    "write_trace",
    "read_trace",
    "emit_plots",
]
