"""External solver adapters: command templates, process execution, result parsing."""

from __future__ import annotations

import json
import os
import shutil
import signal
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ExecutableNotFound, SchemaError, SpawnFailure, UnparseableOutput
from ..problem import FALSIFICATION, VerificationProblem
from ..verdict import Verdict
from .sexpr import parse_all, to_fraction

SMTLIB = "smtlib"
VNNCOMP = "vnncomp"
MOCK = "mock"
DIALECTS = (SMTLIB, VNNCOMP, MOCK)
GRACE = 2.0


@dataclass(frozen=True)
class SolverAdapter:
    id: str
    command: Tuple[str, ...]
    dialect: str = SMTLIB
    timeout: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(self.command))
        if self.dialect not in DIALECTS:
            raise SchemaError("dialect", f"unknown dialect {self.dialect!r}")
        if not any("{problem}" in a for a in self.command):
            raise SchemaError("command", f"adapter {self.id!r} has no {{problem}} placeholder")
        if self.timeout < 1:
            raise SchemaError("timeout", "adapter timeout must be at least 1 second")

    @property
    def input_format(self) -> str:
        """Which emitted file the adapter consumes."""
        return "vnnlib" if self.dialect == VNNCOMP else "smtlib"

    def argv(self, files: Mapping[str, str], timeout: float) -> list:
        subs = {"problem": str(files.get("problem", "")), "model": str(files.get("model", "")),
                "timeout": str(int(max(1, round(timeout)))), "python": sys.executable}
        out = []
        for a in self.command:
            for k, v in subs.items():
                a = a.replace("{" + k + "}", v)
            out.append(a)
        return out


def _mock(*extra):
    return ("{python}", "-m", "verimux.dispatch.mock_solver", *extra)


BUILTIN_ADAPTERS: Dict[str, SolverAdapter] = {
    "mock-smt": SolverAdapter("mock-smt", _mock("{problem}"), SMTLIB),
    "mock-vnn": SolverAdapter("mock-vnn", _mock("--dialect", "vnncomp", "--model", "{model}",
                                                 "{problem}"), VNNCOMP),
    "z3": SolverAdapter("z3", ("z3", "-smt2", "-T:{timeout}", "{problem}"), SMTLIB),
    "cvc5": SolverAdapter("cvc5", ("cvc5", "--lang", "smt2", "--produce-models", "{problem}"), SMTLIB),
}


def adapter_from_dict(d: Mapping) -> SolverAdapter:
    for key in ("id", "command"):
        if key not in d:
            raise SchemaError(key, "adapter entry is missing this field")
    cmd = d["command"]
    if isinstance(cmd, str):
        cmd = cmd.split()
    return SolverAdapter(str(d["id"]), tuple(cmd), d.get("dialect", SMTLIB),
                         float(d.get("timeout", 30.0)))


def load_adapters(path) -> Dict[str, SolverAdapter]:
    """Registry file: a JSON list of adapters or ``{"adapters": [...]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg} at line {e.lineno}") from None
    if isinstance(data, Mapping):
        data = data.get("adapters", [])
    out = dict(BUILTIN_ADAPTERS)
    for entry in data:
        a = adapter_from_dict(entry)
        out[a.id] = a
    return out


@dataclass(frozen=True)
class RawSolverResult:
    exit_status: Optional[int]
    stdout: str
    stderr: str
    wall_time: float
    timed_out: bool = False


def _resolve(exe: str) -> str:
    if os.sep in exe:
        if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
            raise ExecutableNotFound(f"{exe} is not an executable file")
        return exe
    found = shutil.which(exe)
    if found is None:
        raise ExecutableNotFound(f"{exe} not found on PATH")
    return found


def run_external(adapter: SolverAdapter, files: Mapping[str, str],
                 timeout: Optional[float] = None) -> RawSolverResult:
    """Run the adapter on ``files``; the process group is killed at the timeout."""
    timeout = adapter.timeout if timeout is None else timeout
    for key, path in files.items():
        if path and not os.access(path, os.R_OK):
            raise FileNotFoundError(f"{key} file {path} is not readable")
    argv = adapter.argv(files, timeout)
    argv[0] = _resolve(argv[0])
    env = dict(os.environ, LC_ALL="C", LANG="C")
    start = time.perf_counter()
    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                                stdin=subprocess.DEVNULL, env=env, start_new_session=True)
    except OSError as e:
        raise SpawnFailure(f"could not start {argv[0]}: {e}") from None
    try:
        out, err = proc.communicate(timeout=timeout)
        timed_out = False
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
        out, err = proc.communicate()
        timed_out = True
    wall = time.perf_counter() - start
    return RawSolverResult(proc.returncode, out.decode("utf-8", "replace"),
                           err.decode("utf-8", "replace"), wall, timed_out)


def _smt_model(exprs, n_in: int) -> np.ndarray:
    values = {}
    stack = list(exprs)
    while stack:
        e = stack.pop()
        if isinstance(e, list):
            if len(e) == 5 and e[0] == "define-fun" and e[2] == [] and isinstance(e[1], str):
                values[e[1]] = to_fraction(e[4])
            else:
                stack.extend(e)
    return _inputs(values, n_in)


def _inputs(values, n_in) -> np.ndarray:
    missing = [i for i in range(n_in) if f"X_{i}" not in values]
    if missing:
        raise UnparseableOutput(f"model lacks values for inputs {missing}")
    return np.array([float(values[f"X_{i}"]) for i in range(n_in)])


def _vnn_model(exprs, n_in: int) -> np.ndarray:
    values = {}
    stack = list(exprs)
    while stack:
        e = stack.pop()
        if isinstance(e, list):
            if len(e) == 2 and isinstance(e[0], str) and e[0][:2] in ("X_", "Y_"):
                values[e[0]] = to_fraction(e[1])
            else:
                stack.extend(e)
    return _inputs(values, n_in)


_STATUS = {"sat": "sat", "unsat": "unsat", "unknown": "unknown", "violated": "sat",
           "holds": "unsat", "timeout": "timeout"}


def parse_solver_result(raw: RawSolverResult, dialect: str, problem: VerificationProblem,
                        tolerance: float = 1e-9) -> Verdict:
    """Map solver output for the emitted (negated) problem to a verdict of the original goal."""
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}")
    if raw.timed_out:
        return Verdict.timeout("solver exceeded its time limit")
    try:
        exprs = parse_all(raw.stdout)
    except UnparseableOutput as e:
        return Verdict.error(f"unparseable solver output: {e}")
    status = None
    rest = []
    for k, e in enumerate(exprs):
        if isinstance(e, str) and e.lower() in _STATUS:
            status = _STATUS[e.lower()]
            rest = exprs[k + 1:]
            break
    if status is None:
        code = raw.exit_status
        detail = raw.stderr.strip().splitlines()[-1:] or raw.stdout.strip().splitlines()[:1] or [""]
        return Verdict.error(f"unparseable solver output (exit {code}): {detail[0][:200]}")
    if status == "timeout":
        return Verdict.timeout("solver reported timeout")
    if status == "unknown":
        return Verdict.unknown("solver returned unknown")
    if status == "unsat":
        if problem.polarity != FALSIFICATION:
            return Verdict.error("unsat reported for a problem that was not negated")
        return Verdict.valid()
    n_in = problem.model.input_dim
    try:
        x = _vnn_model(rest, n_in) if dialect == VNNCOMP else _smt_model(rest, n_in)
    except UnparseableOutput as e:
        return Verdict.error(f"sat without a usable model: {e}")
    if problem.polarity != FALSIFICATION:
        return Verdict.error("sat reported for a problem that was not negated")
    from ..problem import negate_goal
    original = negate_goal(problem)
    if original.check_witness(x, tolerance):
        return Verdict.falsified(x)
    if original.check_witness(x, 0.0) or _on_boundary(original, x):
        return Verdict.unknown("solver model violates the property only within tolerance")
    return Verdict.error("solver-model mismatch: witness does not violate the property")


def _on_boundary(p: VerificationProblem, x) -> bool:
    from ..model import eval_model
    if not p.input_region.contains(x):
        return False
    y = eval_model(p.model, x)
    return any(all(abs(a.slack(y, x)) <= 1e-6 or a.holds(y, x) for a in d)
               for d in p.violation.linearize(p.model.output_dim).disjuncts)
