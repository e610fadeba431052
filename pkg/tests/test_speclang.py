import pytest
from hypothesis import given, settings, strategies as st

from verimux.errors import (DimensionMismatch, DuplicateGoalName, RecursivePredicate, SortMismatch,
                            SpecSyntaxError, UnboundIdentifier, UnknownModel, UnterminatedString)
from verimux.speclang import (ModelSignature, expand_goal, parse_formula, parse_spec, show_formula,
                              show_module, typecheck_spec)
from verimux.speclang import ast as A
from verimux.speclang.lexer import tokenize

SIG = {"M": ModelSignature(2, 3, "network")}
FIG3 = 'model M from "m.nnet"\ngoal G: forall a: vector 2. robust_to(M, a, 0.5)\n'


def typed(src, sigs=SIG):
    return typecheck_spec(parse_spec(src), sigs)


def compares(f):
    return [n for n in A.walk(f) if isinstance(n, A.Compare)]


def test_parse_robustness_goal():
    m = parse_spec(FIG3)
    assert [g.name for g in m.goals] == ["G"]
    assert isinstance(m.goals[0].body, A.Forall)
    assert m.imports[0] == A.Import("M", "m.nnet")


def test_empty_input():
    m = parse_spec("")
    assert m.goals == () and m.imports == ()


def test_missing_body_reports_end_of_input():
    with pytest.raises(SpecSyntaxError) as e:
        parse_spec("goal G: forall a")
    assert (e.value.line, e.value.col) == (1, 17)


def test_spans_and_comments():
    m = parse_spec('(* header (* nested *) *)\nmodel M from "x"\n\ngoal H:\n  true')
    assert m.goals[0].span.line == 4
    assert m.imports[0].span.line == 2


def test_unterminated_string():
    with pytest.raises(UnterminatedString):
        parse_spec('model M from "oops')


def test_duplicate_goal():
    with pytest.raises(DuplicateGoalName):
        parse_spec("goal G: true goal G: false")


def test_real_literal_text_kept():
    f = parse_formula("x[0] <= 0.1000000000000000000001")
    lit = [n for n in A.walk(f) if isinstance(n, A.RealLit)][0]
    assert lit.text == "0.1000000000000000000001"


def test_lexer_decimal_vs_dot():
    kinds = [t.kind for t in tokenize("vector 2. x")]
    assert kinds[:3] == ["vector", "INT", "."]


def test_precedence():
    f = parse_formula("x < 1 -> x < 2 -> x < 3 \\/ x < 4 /\\ x < 5")
    # -> is right associative and binds loosest
    assert isinstance(f, A.Implies) and isinstance(f.right, A.Implies)
    assert isinstance(f.right.right, A.Or) and isinstance(f.right.right.right, A.And)


def test_typecheck_robust_to():
    t = typed(FIG3)
    assert t.module.goals[0].body.body.args[2].sort == A.REAL


def test_model_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        typed('model M from "m"\ngoal G: forall x: vector 3. M(x)[0] <= 1')


def test_label_compared_with_real():
    with pytest.raises(SortMismatch):
        typed('model M from "m"\ngoal G: forall x: vector 2. argmax(M(x)) < 0.5')


def test_unbound_and_unknown_model():
    with pytest.raises(UnboundIdentifier):
        typed('model M from "m"\ngoal G: forall x: vector 2. M(z)[0] <= 1')
    with pytest.raises(UnknownModel):
        typecheck_spec(parse_spec('model N from "n"\ngoal G: true'), SIG)


def test_recursive_predicate_rejected():
    src = "predicate p(x: real) = q(x)\npredicate q(x: real) = p(x)\ngoal G: true"
    with pytest.raises(RecursivePredicate):
        typed(src, {})


def test_dist_linf_unrolls_to_strict_comparisons():
    t = typed('model M from "m"\ngoal G: forall a: vector 2. forall b: vector 2. dist_linf(a, b, 0.5) -> true')
    f = expand_goal(t.module.goals[0].body, t)
    cs = compares(f)
    assert len(cs) == 4 and all(c.op == "<" for c in cs)
    assert not any(isinstance(n, A.PredApply) for n in A.walk(f))


def test_robust_to_expansion_shape():
    t = typed(FIG3)
    f = expand_goal(t.module.goals[0].body, t)
    inner = f.body
    assert isinstance(inner, A.Forall) and inner.var_sort == A.vector(2)
    assert isinstance(inner.body, A.Implies)
    eq = inner.body.right
    assert eq.op == "=" and isinstance(eq.left, A.ArgMax) and isinstance(eq.right, A.ArgMax)


def test_no_predicates_unchanged():
    t = typed('model M from "m"\ngoal G: forall x: vector 2. M(x)[0] <= 1')
    g = t.module.goals[0].body
    assert expand_goal(g, t) == g


def test_expansion_avoids_capture():
    # the user's variable is called b, the same as the stdlib binder
    t = typed('model M from "m"\ngoal G: forall b: vector 2. robust_to(M, b, 0.5)')
    f = expand_goal(t.module.goals[0].body, t)
    names = [n.var for n in A.walk(f) if isinstance(n, (A.Forall, A.Exists))]
    assert len(names) == len(set(names)) == 2
    eq = [c for c in compares(f) if c.op == "="][0]
    assert eq.left.arg.arg.name != eq.right.arg.arg.name


def test_expansion_idempotent():
    t = typed(FIG3)
    f = expand_goal(t.module.goals[0].body, t)
    assert expand_goal(f, t) == f


def test_bounded_int_quantifier_unrolled():
    t = typed('model M from "m"\ngoal G: forall x: vector 2. forall i: int. 0 <= i /\\ i < 2 -> x[i] <= 1', SIG)
    f = expand_goal(t.module.goals[0].body, t)
    assert not any(isinstance(n, A.Forall) and n.var == "i" for n in A.walk(f))


def test_user_predicate_inlined():
    src = ('model M from "m"\npredicate small(v: vector 3) = v[0] <= 1 /\\ v[1] <= 1\n'
           'goal G: forall x: vector 2. small(M(x))')
    t = typed(src)
    f = expand_goal(t.module.goals[0].body, t)
    assert len(compares(f)) == 2


# -- round trip on generated formulas ---------------------------------------------

names = st.sampled_from(["x", "y", "z"])
ints = st.integers(0, 9).map(lambda i: A.IntLit(i))
reals = st.sampled_from(["0.5", "1.25", "3.0"]).map(lambda s: A.RealLit(s))
terms = st.recursive(
    st.one_of(names.map(A.Var), ints, reals),
    lambda sub: st.one_of(
        st.builds(A.Add, sub, sub), st.builds(A.Sub, sub, sub), st.builds(A.Mul, sub, sub),
        st.builds(A.Neg, sub), st.builds(A.Index, names.map(A.Var), ints)),
    max_leaves=6)
atoms = st.builds(A.Compare, st.sampled_from(["<", "<=", "=", ">=", ">"]), terms, terms)
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(A.And, sub, sub), st.builds(A.Or, sub, sub), st.builds(A.Implies, sub, sub),
        st.builds(A.Not, sub),
        st.builds(A.Forall, names, st.just(A.REAL), sub)),
    max_leaves=5)


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_print_parse_round_trip(f):
    assert parse_formula(show_formula(f)) == f


def test_module_round_trip():
    src = ('model M from "m.nnet"\npredicate p(v: vector 3, e: real) = v[0] < e\n'
           'goal G: forall a: vector 2. robust_to(M, a, 0.5)\ngoal H: forall x: vector 2. p(M(x), 2)')
    m = parse_spec(src)
    assert parse_spec(show_module(m)) == m
