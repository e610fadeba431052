"""Solve one problem with an external adapter: negate, emit, run, parse."""

from __future__ import annotations

import tempfile
import time
from pathlib import Path
from typing import Optional

from ..errors import EmptyConstraint, ExecutableNotFound, SpawnFailure
from ..model import NetworkGraph, write_native_model, write_nnet
from ..problem import FALSIFICATION, VerificationProblem, negate_goal
from ..verdict import Verdict
from .adapters import SolverAdapter, parse_solver_result, run_external
from .smtlib import emit_smtlib
from .vnnlib import emit_vnnlib


def negated(p: VerificationProblem) -> VerificationProblem:
    return p if p.polarity == FALSIFICATION else negate_goal(p)


def write_model_file(model, directory: Path, stem: str) -> Path:
    if isinstance(model, NetworkGraph):
        try:
            text = write_nnet(model)
        except ValueError:
            pass
        else:
            path = directory / f"{stem}.nnet"
            path.write_text(text, encoding="ascii")
            return path
    path = directory / f"{stem}.json"
    path.write_text(write_native_model(model), encoding="utf-8")
    return path


def emit_files(p: VerificationProblem, adapter_format: str, directory: Path, stem: str) -> dict:
    q = negated(p)
    if adapter_format == "vnnlib":
        prob = directory / f"{stem}.vnnlib"
        prob.write_text(emit_vnnlib(q), encoding="ascii")
        return {"problem": str(prob), "model": str(write_model_file(q.model, directory, stem))}
    prob = directory / f"{stem}.smt2"
    prob.write_text(emit_smtlib(q), encoding="ascii")
    return {"problem": str(prob), "model": ""}


def solve_external(p: VerificationProblem, adapter: SolverAdapter, timeout: Optional[float] = None,
                   tolerance: float = 1e-9, workdir: Optional[str] = None) -> Verdict:
    start = time.perf_counter()

    def done(v: Verdict) -> Verdict:
        return v.with_provenance(adapter.id, time.perf_counter() - start, 1)

    try:
        with tempfile.TemporaryDirectory(dir=workdir) as tmp:
            files = emit_files(p, adapter.input_format, Path(tmp), "problem")
            raw = run_external(adapter, files, timeout)
    except EmptyConstraint:
        return done(Verdict.valid(message="negated property is unsatisfiable"))
    except (ExecutableNotFound, SpawnFailure) as e:
        return done(Verdict.error(str(e)))
    return done(parse_solver_result(raw, adapter.dialect, negated(p), tolerance))
