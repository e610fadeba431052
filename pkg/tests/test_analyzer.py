import numpy as np
import pytest

from helpers import (corner_points, goal, grid_min_margin, le, random_box, random_net, random_sizes,
                     robustness_problem, sample_box)
from verimux.analyzer import (AnalyzerConfig, influence_scores, linear_form_bounds, propagate_affine,
                              propagate_box, relu_relaxation, search_counterexample, verify_goal)
from verimux.errors import DimensionMismatch, InvalidInterval, UnsupportedForDomain
from verimux.model import Dense, NetworkGraph, ReLU, SvmModel, DecisionFunction, eval_batch
from verimux.problem import Box, NormalizedGoal, VerificationProblem
from verimux.problem.goal import ClassIs
from verimux.verdict import FALSIFIED, UNKNOWN, VALID

TOL = 1e-9


def identity(n=1):
    return NetworkGraph((Dense(np.eye(n), np.zeros(n)),))


def inside(Y, box, tol=TOL):
    scale = np.maximum(1.0, np.abs(Y))
    return np.all(Y >= box.lower - tol * scale) and np.all(Y <= box.upper + tol * scale)


# -- relu relaxation ---------------------------------------------------------------

def test_relu_relaxation_examples():
    assert relu_relaxation(-1, 1) == (1.0, 0.0, 0.5, 0.5)
    assert relu_relaxation(1, 2) == (1.0, 0.0, 1.0, 0.0)
    assert relu_relaxation(-2, -1) == (0.0, 0.0, 0.0, 0.0)
    assert relu_relaxation(-3, 1)[0] == 0.0
    with pytest.raises(InvalidInterval):
        relu_relaxation(1, 0)


def test_relu_relaxation_encloses(rng):
    for _ in range(200):
        l, u = np.sort(rng.normal(size=2) * 3)
        ls, li, us, ui = relu_relaxation(l, u)
        x = np.linspace(l, u, 101)
        r = np.maximum(x, 0)
        assert np.all(ls * x + li <= r + 1e-12)
        assert np.all(us * x + ui >= r - 1e-12)


# -- interval domain ---------------------------------------------------------------

def test_propagate_box_examples():
    net = NetworkGraph((Dense([[1.0, -1.0]], [0.0]), ReLU()))
    assert propagate_box(net, Box((0, 0), (1, 1))) == Box((0,), (1,))
    pre = NetworkGraph((Dense([[1.0, -1.0]], [0.0]),))
    assert propagate_box(pre, Box((0, 0), (1, 1))) == Box((-1,), (1,))
    b = Box((-1, 2), (3, 5))
    assert propagate_box(identity(2), b) == b
    with pytest.raises(DimensionMismatch):
        propagate_box(identity(2), Box((0,), (1,)))


def test_rbf_rejected():
    svm = SvmModel("rbf", (DecisionFunction([[0.0, 0.0]], [1.0], 0.0),), gamma=1.0)
    with pytest.raises(UnsupportedForDomain):
        propagate_box(svm, Box((0, 0), (1, 1)))


def test_linear_svm_exact(rng):
    svm = SvmModel("linear", tuple(DecisionFunction(rng.normal(size=(3, 2)), rng.normal(size=3), 0.5)
                                   for _ in range(2)))
    b = Box((0, 0), (1, 1))
    Y = eval_batch(svm, corner_points(b))
    out = propagate_box(svm, b)
    assert np.allclose(out.lower, Y.min(axis=0)) and np.allclose(out.upper, Y.max(axis=0))


def test_box_monte_carlo(rng):
    net = random_net(rng, [2, 4, 2])
    b = Box((-1, -1), (1, 1))
    Y = eval_batch(net, sample_box(rng, b, 10_000))
    assert inside(Y, propagate_box(net, b))


# -- affine domain -----------------------------------------------------------------

def test_affine_identity():
    b = Box((-1, 0), (2, 3))
    _, out = propagate_affine(identity(2), b)
    assert out == b


def test_affine_exact_on_linear_nets(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        net = random_net(rng, [n, 4, 3], relu=False)
        b = random_box(rng, n)
        _, out = propagate_affine(net, b)
        Y = eval_batch(net, corner_points(b))
        assert np.allclose(out.lower, Y.min(axis=0), atol=TOL, rtol=TOL)
        assert np.allclose(out.upper, Y.max(axis=0), atol=TOL, rtol=TOL)


def test_affine_sound_and_dominant(rng):
    for seed in range(50):
        r = np.random.default_rng(seed)
        net = random_net(r, [2, 3, 3, 2])
        b = random_box(r, 2)
        bounds, out = propagate_affine(net, b)
        ib = propagate_box(net, b)
        assert np.all(out.lower >= ib.lower - TOL) and np.all(out.upper <= ib.upper + TOL)
        X = sample_box(r, b, 10_000)
        assert inside(eval_batch(net, X), out)
        # every layer's symbolic forms hold pointwise
        h = X
        for layer, bd in zip(net.layers, bounds):
            nxt = h @ layer.weights.T + layer.bias if isinstance(layer, Dense) else np.maximum(h, 0)
            lo = X @ bd.input_lower_coeffs.T + bd.input_lower_const
            hi = X @ bd.input_upper_coeffs.T + bd.input_upper_const
            assert np.all(lo <= nxt + 1e-9) and np.all(nxt <= hi + 1e-9)
            h = nxt


def test_linear_form_bounds_sound(rng):
    net = random_net(rng, [3, 5, 4])
    b = random_box(rng, 3)
    bounds, _ = propagate_affine(net, b)
    v, w = rng.normal(size=4), rng.normal(size=3)
    lo, hi = linear_form_bounds(bounds, b, v, w, 0.25)
    X = sample_box(rng, b, 5000)
    vals = eval_batch(net, X) @ v + X @ w + 0.25
    assert lo <= vals.min() + 1e-9 and vals.max() <= hi + 1e-9


# -- influence ---------------------------------------------------------------------

def test_influence_examples():
    net = NetworkGraph((Dense([[1.0, 0.0]], [0.0]),))
    b = Box((0, 0), (1, 1))
    bounds, _ = propagate_affine(net, b)
    assert list(influence_scores(bounds[-1], b)) == [2.0, 0.0]
    flat = Box((0, 0), (1, 0))
    net2 = NetworkGraph((Dense([[1.0, 1.0]], [0.0]),))
    bounds, _ = propagate_affine(net2, flat)
    assert list(influence_scores(bounds[-1], flat)) == [2.0, 0.0]


def _split_width(net, box, dim):
    return np.mean([np.sum(propagate_affine(net, half)[1].widths) for half in box.split(dim)])


def test_influence_guides_splitting():
    wins = 0
    for seed in range(20):
        r = np.random.default_rng(seed)
        net = random_net(r, [3, 6, 6, 2])
        b = random_box(r, 3)
        bounds, _ = propagate_affine(net, b)
        s = influence_scores(bounds[-1], b)
        if _split_width(net, b, int(np.argmax(s))) <= _split_width(net, b, int(np.argmin(s))):
            wins += 1
    assert wins > 10


# -- search ------------------------------------------------------------------------

def test_search_center_violation():
    # y = -|x| style bump: violation only near the center
    net = NetworkGraph((Dense([[1.0], [-1.0]], [0.0, 0.0]), ReLU(), Dense([[-1.0, -1.0]], [0.0])))
    p = VerificationProblem(Box((-1,), (1,)), net, goal(le(0, -0.5)))
    w = search_counterexample(p, 3)
    assert w is not None and w[0] == 0.0


def test_search_none_when_valid():
    p = VerificationProblem(Box((0,), (1,)), identity(), goal(le(0, 2)))
    assert search_counterexample(p, 5000) is None


def test_search_finds_most(rng):
    found = total = 0
    seed = 0
    while total < 20:
        r = np.random.default_rng(1000 + seed)
        seed += 1
        net = random_net(r, [2, 5, 1])
        b = random_box(r, 2, 0.5)
        lo, hi = propagate_box(net, b).lower[0], propagate_box(net, b).upper[0]
        p = VerificationProblem(b, net, goal(le(0, lo + 0.9 * (hi - lo))))
        margin, _ = grid_min_margin(p, 1e-3)
        if margin >= -1e-6:
            continue
        total += 1
        w = search_counterexample(p, 10_000, seed=seed)
        if w is not None:
            assert p.check_witness(w)
            found += 1
    assert found >= 18


# -- verify_goal -------------------------------------------------------------------

def test_verify_identity():
    p = VerificationProblem(Box((0,), (1,)), identity(), goal(le(0, 2)))
    v = verify_goal(p)
    assert v.tag == VALID and v.subproblems == 1
    v = verify_goal(VerificationProblem(Box((0,), (1,)), identity(), goal(le(0, 0.5))))
    assert v.tag == FALSIFIED and v.witness[0] > 0.5


@pytest.mark.parametrize("domain", ["box", "affine"])
def test_verify_robustness_grid(domain):
    # 2-class net whose decision boundary is x0 + x1 = 0.3
    net = NetworkGraph((Dense([[1.0, 1.0], [-1.0, -1.0]], [0.0, 0.0]), ReLU(),
                        Dense([[1.0, -1.0], [-1.0, 1.0]], [-0.3, 0.3])))
    center = [0.6, 0.6]
    cfg = AnalyzerConfig(domain=domain)
    big = robustness_problem(net, center, 0.5)
    assert grid_min_margin(big, 1e-3)[0] < -1e-6
    v = verify_goal(big, cfg)
    assert v.tag == FALSIFIED and big.check_witness(v.witness)
    assert verify_goal(robustness_problem(net, center, 0.0), cfg).tag == VALID
    small = robustness_problem(net, center, 0.1)
    assert grid_min_margin(small, 1e-3)[0] > 1e-6
    assert verify_goal(small, cfg).tag == VALID


def test_verify_needs_splitting():
    net = NetworkGraph((Dense([[1.0], [-1.0]], [0.0, 0.0]), ReLU(), Dense([[1.0, 1.0]], [0.0])))
    p = VerificationProblem(Box((-1,), (1,)), net, goal(le(0, 1.2)))
    # intervals bound |x| by 2 here; the affine domain is exact
    assert verify_goal(p).subproblems == 1
    v = verify_goal(p, AnalyzerConfig(domain="box"))
    assert v.tag == VALID and v.subproblems > 1
    assert verify_goal(p, AnalyzerConfig(domain="box", split_budget=1)).tag == UNKNOWN


def test_verify_deterministic(rng):
    net = random_net(rng, [3, 6, 3])
    p = robustness_problem(net, rng.normal(size=3), 0.4)
    a, b = verify_goal(p), verify_goal(p)
    assert a == b
    if a.witness is not None:
        assert np.array_equal(a.witness, b.witness)


def test_verify_never_contradicts_grid():
    for seed in range(15):
        r = np.random.default_rng(500 + seed)
        net = random_net(r, [2, 4, 3])
        p = robustness_problem(net, r.uniform(-1, 1, 2), 0.2)
        margin, _ = grid_min_margin(p, 5e-3)
        v = verify_goal(p, AnalyzerConfig(split_budget=64))
        if v.tag == VALID:
            assert margin > -1e-6
        elif v.tag == FALSIFIED:
            assert p.check_witness(v.witness)
