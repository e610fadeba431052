"""Planning, execution, verdict composition, and reporting."""

from .config import (BUILTIN_AFFINE, BUILTIN_BOX, METAMORPHIC, RunConfig, build_config,
                     load_config_file, seed_from_env)
from .pipeline import load_inputs, load_spec_models, run_problems, verify
from .report import (CompositeReport, EngineEntry, GoalReport, exit_code, render_agreement,
                     render_report)
from .schedule import Job, Schedule, Skip, combine_verdicts, execute, plan, run_job

__all__ = [
    "BUILTIN_AFFINE", "BUILTIN_BOX", "METAMORPHIC", "CompositeReport", "EngineEntry",
    "GoalReport", "Job", "RunConfig", "Schedule", "Skip", "build_config", "combine_verdicts",
    "execute", "exit_code", "load_config_file", "load_inputs", "load_spec_models", "plan",
    "render_agreement", "render_report", "run_job", "run_problems", "seed_from_env", "verify",
]
