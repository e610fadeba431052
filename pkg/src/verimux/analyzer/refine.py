"""Branch-and-refine verification of a single problem."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import Dense, flat_layers
from ..problem import PROOF, Box, VerificationProblem
from ..verdict import Verdict
from .affine import influence_scores, linear_form_bounds, propagate_affine
from .interval import interval_bounds
from .search import search_counterexample

BOX = "box"
AFFINE = "affine"
ENGINE = "analyzer"


@dataclass(frozen=True)
class AnalyzerConfig:
    domain: str = AFFINE
    split_budget: int = 256
    max_depth: int = 16
    samples: int = 256
    tolerance: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.domain not in (BOX, AFFINE):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.split_budget < 1:
            raise ValueError("split_budget must be at least 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


class _BoxAnalysis:
    """Interval bounds plus a crude sensitivity matrix used for split scores."""

    def __init__(self, layers, box: Box):
        self.box = box
        self.bounds = interval_bounds(layers, box.lower, box.upper)
        sens = np.eye(box.dim)
        for layer, (l, u) in zip(layers, self.bounds):
            if isinstance(layer, Dense):
                sens = np.abs(layer.weights) @ sens
            else:
                sens = sens * (u > 0)[:, None]
        self.sens = sens

    def form(self, out_vec, in_vec):
        yl, yu = self.bounds[-1]
        lo, hi = self.box.lower, self.box.upper
        low = np.maximum(out_vec, 0) @ yl + np.minimum(out_vec, 0) @ yu
        up = np.maximum(out_vec, 0) @ yu + np.minimum(out_vec, 0) @ yl
        low += np.maximum(in_vec, 0) @ lo + np.minimum(in_vec, 0) @ hi
        up += np.maximum(in_vec, 0) @ hi + np.minimum(in_vec, 0) @ lo
        return low, up

    def scores(self):
        return self.box.widths * 2 * self.sens.sum(axis=0)


class _AffineAnalysis:
    def __init__(self, model, box: Box):
        self.box = box
        self.bounds, _ = propagate_affine(model, box)

    def form(self, out_vec, in_vec):
        return linear_form_bounds(self.bounds, self.box, out_vec, in_vec)

    def scores(self):
        return influence_scores(self.bounds[-1], self.box)


def _certified(goal, analysis, n_out, n_in, tol) -> bool:
    for d in goal.disjuncts:
        ok = True
        for a in d:
            _, up = analysis.form(a.out_vector(n_out), a.in_vector(n_in))
            if not float(a.bound) - up > tol:
                ok = False
                break
        if ok:
            return True
    return False


def verify_goal(p: VerificationProblem, cfg: Optional[AnalyzerConfig] = None,
                timeout: Optional[float] = None) -> Verdict:
    """Prove ``p`` by bound propagation with influence-guided splitting.

    ``timeout`` (seconds) is checked between subboxes.
    """
    cfg = cfg or AnalyzerConfig()
    start = time.perf_counter()
    if p.polarity != PROOF:
        raise ValueError("verify_goal expects a problem in proof polarity")
    layers = flat_layers(p.model)
    n_out, n_in = p.model.output_dim, p.input_region.dim
    goal = p.claim.linearize(n_out)

    def done(v: Verdict, count: int) -> Verdict:
        return v.with_provenance(ENGINE, time.perf_counter() - start, count)

    if goal.is_true:
        return done(Verdict.valid(), 0)

    def analyze(box):
        return _BoxAnalysis(layers, box) if cfg.domain == BOX else _AffineAnalysis(p.model, box)

    level = [(p.input_region, 0)]
    created = 1
    processed = 0
    certified: list[Box] = []
    gave_up = False
    depth_level = 0
    while level:
        nxt = []
        found = None
        for idx, (box, depth) in enumerate(level):
            if timeout is not None and time.perf_counter() - start > timeout:
                return done(Verdict.timeout("analysis exceeded its time limit"), processed)
            processed += 1
            an = analyze(box)
            if not goal.is_false and _certified(goal, an, n_out, n_in, cfg.tolerance):
                certified.append(box)
                continue
            w = search_counterexample(p.with_box(box), cfg.samples,
                                      seed=(cfg.seed, depth_level, idx), tolerance=cfg.tolerance)
            if w is not None:
                if found is None:
                    found = w
                continue
            if depth < cfg.max_depth and created + 2 <= cfg.split_budget and n_in > 0:
                scores = an.scores()
                dim = int(np.argmax(scores)) if np.any(scores > 0) else int(np.argmax(box.widths))
                if box.widths[dim] <= 0:
                    gave_up = True
                    continue
                for child in box.split(dim):
                    nxt.append((child, depth + 1))
                created += 2
            else:
                gave_up = True
        if found is not None:
            if any(b.contains(found) for b in certified):
                return done(Verdict.error("witness lies in a certified subbox"), processed)
            return done(Verdict.falsified(found), processed)
        level = nxt
        depth_level += 1
    if gave_up:
        return done(Verdict.unknown("split budget or depth exhausted"), processed)
    return done(Verdict.valid(), processed)
