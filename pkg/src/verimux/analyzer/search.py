"""Concrete counterexample search: box corners, center, then uniform samples."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..model import eval_batch
from ..problem import VerificationProblem
from ..problem.goal import ClassIs, ClassIsNot, LinearConstraint

MAX_CORNER_DIM = 10
_CHUNK = 1024


def _atom_mask(a, Y, X, margin):
    if isinstance(a, LinearConstraint):
        lhs = np.zeros(len(Y))
        for k, c in a.out_coeffs:
            lhs += float(c) * Y[:, k]
        for k, c in a.in_coeffs:
            lhs += float(c) * X[:, k]
        s = float(a.bound) - lhs
        if margin > 0:
            return s > margin
        return s > 0 if a.strict else s >= 0
    # class atoms: use the exact scalar check row by row
    return np.array([a.holds(y, x, margin) for y, x in zip(Y, X)], dtype=bool)


def goal_mask(goal, Y, X, margin: float = 0.0) -> np.ndarray:
    """Vectorized ``goal.holds`` over rows of (Y, X)."""
    out = np.zeros(len(Y), dtype=bool)
    for d in goal.disjuncts:
        m = np.ones(len(Y), dtype=bool)
        for a in d:
            m &= _atom_mask(a, Y, X, margin)
        out |= m
    return out


def candidates(box, budget: int, rng: np.random.Generator):
    """Yield arrays of candidate points, at most ``budget`` in total."""
    left = budget
    n = box.dim
    if n <= MAX_CORNER_DIM and left > 0:
        k = min(1 << n, left)
        lo, hi = box.inner_lower, box.inner_upper
        masks = (np.arange(k)[:, None] >> np.arange(n)[None, :]) & 1
        yield np.where(masks == 1, hi, lo)
        left -= k
    if left > 0:
        c = np.clip(box.center, box.inner_lower, box.inner_upper)
        yield c[None, :]
        left -= 1
    lo, hi = box.inner_lower, box.inner_upper
    while left > 0:
        k = min(_CHUNK, left)
        yield lo + (hi - lo) * rng.random((k, n))
        left -= k


def search_counterexample(p: VerificationProblem, budget: int, seed=0,
                          tolerance: float = 1e-9) -> Optional[np.ndarray]:
    """First sampled x with P(x) and not Q(f(x), x), or None."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    bad = p.violation.linearize(p.model.output_dim)
    if bad.is_false:
        return None
    for X in candidates(p.input_region, budget, rng):
        Y = eval_batch(p.model, X)
        m = goal_mask(bad, Y, X, margin=tolerance)
        for a in p.constraints:
            m &= _atom_mask(a, Y, X, 0.0)
        for i in np.flatnonzero(m):
            if p.check_witness(X[i], tolerance):
                return X[i].copy()
    return None
