"""
Experiments - Run configuration, commands, sweeps and plots
"""

from .commands import cmd_compare, cmd_evaluate, cmd_generate, cmd_sweep, cmd_train
from .config import DEFAULTS, RunConfig, load_run_config, parse_override, thread_cap
from .generators import build_dataset, build_test_set, initialize_generators
from .orchestrator import SweepOrchestrator, run_in_threads
from .pipeline import SplitData, fit_split, prepare_split, retrain_full, run_split
from .plotting import PLOT_KINDS, cmd_plot
from .run_store import RunStore
from .sweep import GridPoint, plan_sweep

__all__ = [
    "DEFAULTS",
    "GridPoint",
    "PLOT_KINDS",
    "RunConfig",
    "RunStore",
    "SplitData",
    "SweepOrchestrator",
    "build_dataset",
    "build_test_set",
    "cmd_compare",
    "cmd_evaluate",
    "cmd_generate",
    "cmd_plot",
    "cmd_sweep",
    "cmd_train",
    "fit_split",
    "initialize_generators",
    "load_run_config",
    "parse_override",
    "plan_sweep",
    "prepare_split",
    "retrain_full",
    "run_in_threads",
    "run_split",
    "thread_cap",
]
