"""The ``verify`` pipeline: load inputs, build problems, schedule, report."""

from __future__ import annotations

import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .. import __version__
from ..dispatch import BUILTIN_ADAPTERS, SolverAdapter, load_adapters
from ..model import Dataset, Model, load_dataset, load_model, signature
from ..problem import VerificationProblem, build_problems
from ..speclang import TypedSpec, parse_spec, typecheck_spec
from .config import RunConfig
from .report import CompositeReport, EngineEntry, GoalReport
from .schedule import Schedule, combine_verdicts, execute, plan


@dataclass
class Inputs:
    spec: TypedSpec
    models: Dict[str, Model]
    datasets: Dict[str, Dataset]


def load_spec_models(spec_path, overrides: Sequence = (), apply_normalization: bool = False):
    """Parse a spec and load every imported model (paths relative to the spec file)."""
    spec_path = Path(spec_path)
    module = parse_spec(spec_path.read_text(encoding="utf-8"))
    over = dict(overrides)
    models = {}
    for imp in module.imports:
        path = over.get(imp.name)
        if path is None:
            path = Path(imp.path)
            if not path.is_absolute():
                path = spec_path.parent / path
        models[imp.name] = load_model(path, apply_normalization)
    unknown = sorted(set(over) - set(models))
    if unknown:
        from ..errors import UnknownModel
        raise UnknownModel(f"--model given for {unknown}, which the spec does not import")
    typed = typecheck_spec(module, {k: signature(m) for k, m in models.items()})
    return typed, models


def load_inputs(cfg: RunConfig) -> Inputs:
    typed, models = load_spec_models(cfg.spec, cfg.models, cfg.apply_normalization)
    datasets = {g: load_dataset(p, cfg.labels) for g, p in cfg.datasets}
    return Inputs(typed, models, datasets)


def adapters_for(cfg: RunConfig) -> Dict[str, SolverAdapter]:
    return load_adapters(cfg.adapters) if cfg.adapters else dict(BUILTIN_ADAPTERS)


def metadata(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.config_hash(), "seed": cfg.seed, "engines": list(cfg.engines),
            "versions": {"verimux": __version__, "numpy": np.__version__,
                         "python": platform.python_version()}}


def assemble(schedule: Schedule, verdicts: Sequence, cfg: RunConfig) -> CompositeReport:
    by_problem: Dict[int, Dict[str, EngineEntry]] = {k: {} for k in range(len(schedule.problems))}
    for job, v in zip(schedule.jobs, verdicts):
        by_problem[job.problem][job.engine] = EngineEntry(job.engine, v)
    for s in schedule.skips:
        by_problem[s.problem][s.engine] = EngineEntry(s.engine, None, s.reason)
    goals = []
    for k, p in enumerate(schedule.problems):
        entries = tuple(by_problem[k][e] for e in schedule.engines)
        ran = [e.verdict for e in entries if e.verdict is not None]
        goals.append(GoalReport(p.name, p.goal, p.sample, entries,
                                combine_verdicts(ran, schedule.engines)))
    return CompositeReport(tuple(goals), metadata(cfg))


def run_problems(problems: Sequence[VerificationProblem], cfg: RunConfig,
                 adapters: Optional[Mapping[str, SolverAdapter]] = None) -> CompositeReport:
    adapters = adapters_for(cfg) if adapters is None else adapters
    schedule = plan(cfg, problems, adapters)
    return assemble(schedule, execute(schedule, cfg, adapters), cfg)


def verify(cfg: RunConfig) -> CompositeReport:
    inputs = load_inputs(cfg)
    clamp = cfg.clamp
    problems = build_problems(inputs.spec, inputs.models, inputs.datasets, clamp)
    return run_problems(problems, cfg)
