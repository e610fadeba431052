"""Planning (which engine runs which goal), execution, and verdict combination."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

from ..analyzer import AFFINE, BOX, search_counterexample, verify_goal
from ..dispatch import SolverAdapter, solve_external
from ..errors import EmptyInput, NoCapableEngine, SchemaError, VerimuxError
from ..model import is_rbf
from ..problem import VerificationProblem
from ..verdict import ERROR, FALSIFIED, TIMEOUT, UNKNOWN, VALID, Verdict
from .config import BUILTIN_AFFINE, BUILTIN_BOX, BUILTIN_ENGINES, METAMORPHIC, RunConfig


@dataclass(frozen=True)
class Job:
    problem: int
    engine: str


@dataclass(frozen=True)
class Skip:
    problem: int
    engine: str
    reason: str


@dataclass(frozen=True)
class Schedule:
    problems: Tuple[VerificationProblem, ...]
    engines: Tuple[str, ...]
    jobs: Tuple[Job, ...]
    skips: Tuple[Skip, ...]


def skip_reason(engine: str, p: VerificationProblem, adapters: Mapping[str, SolverAdapter]) -> Optional[str]:
    """Why ``engine`` cannot handle ``p``, or None when it can."""
    if engine in (BUILTIN_BOX, BUILTIN_AFFINE):
        if is_rbf(p.model):
            return "RBF kernels are outside the interval and affine domains"
        return None
    if engine == METAMORPHIC:
        return None
    if engine in adapters:
        if is_rbf(p.model):
            return "RBF kernels cannot be encoded in linear real arithmetic"
        return None
    raise SchemaError("engines", f"unknown engine {engine!r}")


def plan(cfg: RunConfig, problems: Sequence[VerificationProblem],
         adapters: Mapping[str, SolverAdapter]) -> Schedule:
    for e in cfg.engines:
        if e not in BUILTIN_ENGINES and e not in adapters:
            raise SchemaError("engines", f"unknown engine {e!r}")
    jobs, skips = [], []
    for k, p in enumerate(problems):
        ok = False
        for e in cfg.engines:
            reason = skip_reason(e, p, adapters)
            if reason is None:
                jobs.append(Job(k, e))
                ok = True
            else:
                skips.append(Skip(k, e, reason))
        if not ok:
            raise NoCapableEngine(p.name)
    return Schedule(tuple(problems), tuple(cfg.engines), tuple(jobs), tuple(skips))


def run_job(p: VerificationProblem, engine: str, cfg: RunConfig,
            adapters: Mapping[str, SolverAdapter]) -> Verdict:
    try:
        if engine in (BUILTIN_BOX, BUILTIN_AFFINE):
            acfg = cfg.analyzer_config(BOX if engine == BUILTIN_BOX else AFFINE)
            v = verify_goal(p, acfg, timeout=cfg.timeout)
        elif engine == METAMORPHIC:
            w = search_counterexample(p, max(1, cfg.samples * 16), seed=cfg.seed,
                                      tolerance=cfg.tolerance)
            v = (Verdict.falsified(w, subproblems=1) if w is not None
                 else Verdict.unknown("no counterexample found by sampling", subproblems=1))
        else:
            v = solve_external(p, adapters[engine], timeout=cfg.timeout, tolerance=cfg.tolerance)
    except VerimuxError as e:
        v = Verdict.error(f"{type(e).__name__}: {e}")
    if v.tag == FALSIFIED and not p.check_witness(v.witness, cfg.tolerance):
        v = Verdict.error("engine witness failed concrete re-verification")
    return v.with_provenance(engine=engine)


def execute(schedule: Schedule, cfg: RunConfig, adapters: Mapping[str, SolverAdapter]) -> list:
    """Verdicts in job order; the worker count does not affect the result."""
    def one(job: Job):
        return run_job(schedule.problems[job.problem], job.engine, cfg, adapters)

    if cfg.parallelism == 1 or len(schedule.jobs) <= 1:
        return [one(j) for j in schedule.jobs]
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(one, schedule.jobs))


_RANK = {VALID: 1, UNKNOWN: 2, TIMEOUT: 3, ERROR: 4}
INCONSISTENT = "inconsistent verdicts"


def _inconsistent(v: Verdict) -> bool:
    return v.tag == ERROR and v.message.startswith(INCONSISTENT)


def combine_verdicts(vs: Sequence[Verdict], engine_order: Sequence[str] = ()) -> Verdict:
    """Combine verdicts of several engines on one goal.

    Falsified beats Valid beats Unknown beats Timeout beats Error, except
    that Valid together with Falsified is an inconsistency and yields Error.
    That Error absorbs everything, which keeps the combination associative.
    The witness comes from the earliest engine in ``engine_order``.
    """
    if not vs:
        raise EmptyInput("no verdicts to combine")
    order = {e: k for k, e in enumerate(engine_order)}

    def key(v: Verdict):
        return (order.get(v.engine, len(order)), v.engine, v.witness or ())

    subs = sum(v.subproblems for v in vs)
    fals = sorted((v for v in vs if v.tag == FALSIFIED), key=key)
    valid = sorted((v for v in vs if v.tag == VALID), key=key)
    if any(_inconsistent(v) for v in vs):
        return Verdict.error(INCONSISTENT + ": carried from a partial combination",
                             engine="combined", subproblems=subs)
    if fals and valid:
        names = ", ".join(sorted({v.engine for v in fals + valid}, key=lambda e: (order.get(e, len(order)), e)))
        return Verdict.error(f"{INCONSISTENT}: Valid and Falsified ({names})",
                             engine="combined", subproblems=subs)
    if fals:
        w = fals[0]
        # keep the witness's engine so nested combinations pick the same witness
        return Verdict.falsified(w.witness, engine=w.engine, subproblems=subs,
                                 message=f"witness from {w.engine}")
    best = min(vs, key=lambda v: (_RANK[v.tag], key(v)))
    return Verdict(best.tag, None, best.message if best.tag != VALID else "", "combined",
                   0.0, subs)
