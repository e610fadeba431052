"""Emission of SMT-LIB/VNN-LIB problems and external solver dispatch."""

from .adapters import (BUILTIN_ADAPTERS, RawSolverResult, SolverAdapter, adapter_from_dict,
                       load_adapters, parse_solver_result, run_external)
from .engine import emit_files, negated, solve_external
from .phase_oracle import decide, decide_script, parse_script
from .smtlib import emit_smtlib
from .vnnlib import VnnProperty, check_vnnlib, emit_vnnlib

__all__ = [
    "BUILTIN_ADAPTERS", "RawSolverResult", "SolverAdapter", "VnnProperty", "adapter_from_dict",
    "check_vnnlib", "decide", "decide_script", "emit_files", "emit_smtlib", "emit_vnnlib",
    "load_adapters", "negated", "parse_script", "parse_solver_result", "run_external",
    "solve_external",
]
