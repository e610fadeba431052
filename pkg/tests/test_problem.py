from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import goal, le, random_net
from verimux.errors import (InvalidInterval, NonLinearAtom, PartitionTooLarge, UnboundedInputRegion,
                            UnsupportedFormulaShape)
from verimux.model import Dense, NetworkGraph, eval_model, parse_dataset, signature
from verimux.problem import (FALSIFICATION, PROOF, Box, ClassIs, ClassIsNot, LinearConstraint,
                             NormalizedGoal, VerificationProblem, build_problems, negate_goal,
                             normalize, normalize_goal, split_goals)
from verimux.speclang import parse_formula, parse_spec, typecheck_spec

F = Fraction


def problems_for(src, model, data=None):
    spec = typecheck_spec(parse_spec(src), {"M": signature(model)})
    return build_problems(spec, {"M": model}, data)


@pytest.fixture
def net23(rng):
    return random_net(rng, [2, 4, 3])


def test_robustness_per_row(net23):
    data = parse_dataset("0.1,0.2\n0.3,-0.4\n1,1\n0,0\n-0.25,0.75\n")
    ps = problems_for('model M from "m"\ngoal G: forall a: vector 2. robust_to(M, a, 0.5)',
                      net23, {"G": data})
    assert len(ps) == 5
    for k, (p, row) in enumerate(zip(ps, data.rows)):
        assert p.sample == k and p.name == f"G[{k}]"
        want_lo = tuple(F(t) - F("0.5") for t in row.text)
        want_hi = tuple(F(t) + F("0.5") for t in row.text)
        assert p.input_region == Box(want_lo, want_hi)
        label = int(np.argmax(eval_model(net23, row.features)))
        assert p.output_constraint == NormalizedGoal.of([[ClassIs(label)]])


def test_box_goal(net23):
    ps = problems_for('model M from "m"\ngoal H: forall x: vector 2. '
                      '(0 <= x[0] /\\ x[0] <= 1 /\\ 0 <= x[1] /\\ x[1] <= 1) -> M(x)[0] <= 3', net23)
    assert len(ps) == 1
    assert ps[0].input_region == Box((0, 0), (1, 1))
    assert ps[0].output_constraint == goal(le(0, 3))


def test_unbounded_inputs(net23):
    with pytest.raises(UnboundedInputRegion):
        problems_for('model M from "m"\ngoal H: forall x: vector 2. M(x)[0] <= 3', net23)
    with pytest.raises(UnboundedInputRegion):
        problems_for('model M from "m"\ngoal H: forall r: real. forall x: vector 2. '
                     '0 <= x[0] /\\ x[0] <= 1 /\\ 0 <= x[1] /\\ x[1] <= 1 -> M(x)[0] <= r', net23)


def test_residual_constraints_kept(net23):
    ps = problems_for('model M from "m"\ngoal H: forall x: vector 2. '
                      '0 <= x[0] /\\ x[0] <= 1 /\\ 0 <= x[1] /\\ x[1] <= 1 /\\ x[0] + x[1] <= 1 '
                      '-> M(x)[0] <= 3', net23)
    p = ps[0]
    assert len(p.residual) == 1 and p.residual[0].in_coeffs == ((0, F(1)), (1, F(1)))
    assert not p.precondition_holds([0.75, 0.75])
    assert p.precondition_holds([0.25, 0.25])


def test_input_dependent_claim(net23):
    ps = problems_for('model M from "m"\ngoal H: forall x: vector 2. '
                      '0 <= x[0] /\\ x[0] <= 1 /\\ 0 <= x[1] /\\ x[1] <= 1 -> M(x)[0] - x[1] <= 3', net23)
    assert ps[0].output_constraint.mentions_inputs()


def test_negation_examples():
    net = NetworkGraph((Dense(np.eye(3), np.zeros(3)),))
    p = VerificationProblem(Box((0, 0, 0), (1, 1, 1)), net, goal(le(0, 3)))
    n = negate_goal(p)
    assert n.polarity == FALSIFICATION
    (atom,), = n.output_constraint.disjuncts
    # 3 < y[0]  <=>  -y[0] < -3
    assert atom == LinearConstraint(((0, F(-1)),), (), "<", F(-3))
    assert n.input_region == p.input_region
    q = VerificationProblem(p.input_region, net, NormalizedGoal.of([[ClassIs(2)]]))
    assert negate_goal(q).output_constraint == NormalizedGoal.of([[ClassIsNot(2)]])
    assert negate_goal(negate_goal(q)).polarity == PROOF


def test_normalize_goal_examples():
    g = normalize_goal(parse_formula("y[0] <= 3 /\\ y[1] <= 3"))
    assert len(g.disjuncts) == 1 and len(g.disjuncts[0]) == 2
    g = normalize_goal(parse_formula("argmax(y) = 0"), 3).linearize(3)
    atoms = g.disjuncts[0]
    assert {(a.out_coeffs, a.op) for a in atoms} == {
        (((0, F(-1)), (1, F(1))), "<"), (((0, F(-1)), (2, F(1))), "<")}
    with pytest.raises(NonLinearAtom):
        normalize_goal(parse_formula("y[0] * y[1] <= 1"))


def test_normalize_equality_and_not():
    g = normalize_goal(parse_formula("not (y[0] = 1)"))
    assert len(g.disjuncts) == 2
    y = np.array([1.0])
    assert not g.holds(y, np.zeros(0))
    assert g.holds(np.array([1.5]), np.zeros(0))


def test_split_examples(net23):
    p = VerificationProblem(Box((0,), (1,)), NetworkGraph((Dense([[1.0]], [0.0]),)), goal(le(0, 1)))
    parts = split_goals(p, 2)
    assert [q.input_region for q in parts] == [Box((0,), (F(1, 2),)), Box((F(1, 2),), (1,))]
    assert split_goals(p, 1) == [p]
    q = VerificationProblem(Box((0, -1), (2, 1)), net23, goal(le(0, 1)))
    parts = split_goals(q, 3)
    assert len(parts) == 9
    assert sum(s.input_region.measure() for s in parts) == q.input_region.measure()
    with pytest.raises(PartitionTooLarge):
        split_goals(q, 65)


def test_partition_counterexample_lifts(net23, rng):
    q = VerificationProblem(Box((-1, -1), (1, 1)), net23, goal(le(0, 0)))
    for sub in split_goals(q, 4):
        x = sub.input_region.center
        if sub.check_witness(x):
            assert q.check_witness(x)


def test_box_rounding():
    b = Box((F(1, 10),), (F(3, 10),))
    assert b.lower[0] <= 0.1 and F(b.lower[0]) <= F(1, 10)
    assert F(b.upper[0]) >= F(3, 10)
    assert F(b.inner_lower[0]) >= F(1, 10) and F(b.inner_upper[0]) <= F(3, 10)
    for c in b.corners():
        assert b.contains(c)
    with pytest.raises(InvalidInterval):
        Box((1,), (0,))


# -- random goals ------------------------------------------------------------------

N_OUT, N_IN = 3, 2
coeff = st.integers(-3, 3).map(F)
lin_atoms = st.builds(
    lambda oc, ic, op, b: LinearConstraint(
        tuple((k, c) for k, c in enumerate(oc) if c), tuple((k, c) for k, c in enumerate(ic) if c),
        op, b),
    st.lists(coeff, min_size=N_OUT, max_size=N_OUT), st.lists(coeff, min_size=N_IN, max_size=N_IN),
    st.sampled_from(["<", "<="]), st.integers(-5, 5).map(F))
class_atoms = st.builds(lambda c, pos: ClassIs(c) if pos else ClassIsNot(c),
                        st.integers(0, N_OUT - 1), st.booleans())
any_atom = st.one_of(lin_atoms, lin_atoms, class_atoms)
goals = st.lists(st.lists(any_atom, min_size=1, max_size=3), min_size=1, max_size=3).map(NormalizedGoal.of)


@settings(max_examples=200, deadline=None)
@given(goals)
def test_double_negation_is_normalization(g):
    net = NetworkGraph((Dense(np.ones((N_OUT, N_IN)), np.zeros(N_OUT)),))
    p = VerificationProblem(Box((0, 0), (1, 1)), net, NormalizedGoal(tuple(reversed(g.disjuncts))))
    assert negate_goal(negate_goal(p)) == normalize(p)


@settings(max_examples=100, deadline=None)
@given(goals, st.integers(0, 2 ** 32 - 1))
def test_semantic_complement(g, seed):
    r = np.random.default_rng(seed)
    neg = g.negate()
    for _ in range(10):
        y, x = r.normal(size=N_OUT), r.normal(size=N_IN)
        assert g.holds(y, x) != neg.holds(y, x)
        lin = g.linearize(N_OUT)
        assert lin.holds(y, x) == g.holds(y, x)
