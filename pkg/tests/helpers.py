"""Random model/problem generators and brute-force oracles shared by the tests."""

import itertools
from fractions import Fraction

import numpy as np

from verimux.model import Dense, NetworkGraph, ReLU, eval_batch
from verimux.problem import Box, NormalizedGoal, VerificationProblem
from verimux.problem.goal import ClassIs, LinearConstraint


def random_net(rng, sizes, relu=True):
    layers = []
    for k in range(len(sizes) - 1):
        layers.append(Dense(rng.normal(size=(sizes[k + 1], sizes[k])), rng.normal(size=sizes[k + 1])))
        if relu and k < len(sizes) - 2:
            layers.append(ReLU())
    return NetworkGraph(tuple(layers))


def random_sizes(rng, max_in=4, max_hidden=8, max_layers=4):
    n_layers = int(rng.integers(1, max_layers + 1))
    return ([int(rng.integers(1, max_in + 1))]
            + [int(rng.integers(1, max_hidden + 1)) for _ in range(n_layers - 1)]
            + [int(rng.integers(1, max_hidden + 1))])


def random_box(rng, n, scale=1.0):
    c = rng.uniform(-scale, scale, size=n)
    w = rng.uniform(0.01, scale, size=n)
    return Box.from_floats(c - w, c + w)


def sample_box(rng, box, k):
    lo, hi = box.inner_lower, box.inner_upper
    return lo + (hi - lo) * rng.random((k, box.dim))


def corner_points(box):
    return np.array(list(box.corners()))


def le(out_index, bound, coeff=1):
    """Atom ``coeff * y[out_index] <= bound``."""
    return LinearConstraint(((out_index, Fraction(coeff)),), (), "<=", Fraction(bound))


def goal(*conjuncts):
    return NormalizedGoal.of([list(conjuncts)])


def grid(box, step):
    """All points of a regular grid over the box with spacing at most ``step``."""
    axes = []
    for lo, hi in zip(box.inner_lower, box.inner_upper):
        n = max(2, int(np.ceil((hi - lo) / step)) + 1)
        axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_min_margin(p: VerificationProblem, step, chunk=200_000):
    """Smallest slack of Q over the grid; negative means a grid point violates Q.

    Q must be a single conjunction of linear atoms after linearization.
    """
    q = p.claim.linearize(p.model.output_dim)
    assert len(q.disjuncts) == 1
    pts = grid(p.input_region, step)
    worst, arg = np.inf, None
    for s in range(0, len(pts), chunk):
        X = pts[s:s + chunk]
        Y = eval_batch(p.model, X)
        m = np.full(len(X), np.inf)
        for a in q.disjuncts[0]:
            lhs = Y @ a.out_vector(Y.shape[1]) + X @ a.in_vector(X.shape[1])
            m = np.minimum(m, float(a.bound) - lhs)
        k = int(np.argmin(m))
        if m[k] < worst:
            worst, arg = m[k], X[k]
    return worst, arg


def robustness_problem(net, center, eps, label=None):
    center = np.asarray(center, dtype=float)
    if label is None:
        label = int(np.argmax(net.evaluate(center)))
    box = Box.from_floats(center - eps, center + eps)
    return VerificationProblem(box, net, NormalizedGoal.of([[ClassIs(label)]]))


def desk_problem(rng, kind=None):
    """Small problem (input dim <= 2, <= 6 hidden ReLUs) for exhaustive oracles."""
    n_in = int(rng.integers(1, 3))
    hidden = int(rng.integers(1, 7))
    n_out = int(rng.integers(2, 4))
    net = random_net(rng, [n_in, hidden, n_out])
    kind = kind or ("robust" if rng.random() < 0.5 else "bound")
    if kind == "robust":
        return robustness_problem(net, rng.uniform(-1, 1, n_in), float(rng.uniform(0.05, 0.6)))
    box = random_box(rng, n_in, 0.5)
    Y = eval_batch(net, grid(box, 0.05))
    j = int(rng.integers(n_out))
    spread = float(np.ptp(Y[:, j]))
    bound = float(np.quantile(Y[:, j], rng.uniform(0.5, 1.0))) + rng.uniform(-0.05, 0.2) * spread
    return VerificationProblem(box, net, goal(le(j, round(bound, 3))))
