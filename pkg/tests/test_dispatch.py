import sys
from fractions import Fraction

import numpy as np
import pytest

from helpers import desk_problem, goal, le, random_net, robustness_problem
from verimux.analyzer import verify_goal
from verimux.dispatch import (BUILTIN_ADAPTERS, RawSolverResult, SolverAdapter, check_vnnlib,
                              decide_script, emit_files, emit_smtlib, emit_vnnlib, load_adapters,
                              negated, parse_solver_result, run_external, solve_external)
from verimux.dispatch.sexpr import decimal, dump, parse_all, to_fraction
from verimux.errors import (EmptyConstraint, ExecutableNotFound, SchemaError, UnparseableOutput,
                            UnsupportedModel)
from verimux.model import DecisionFunction, Dense, NetworkGraph, ReLU, SvmModel, eval_model
from verimux.problem import Box, NormalizedGoal, VerificationProblem
from verimux.problem.goal import LinearConstraint
from verimux.verdict import ERROR, FALSIFIED, TIMEOUT, UNKNOWN, VALID


def relu_identity():
    return NetworkGraph((Dense([[1.0]], [0.0]), ReLU(), Dense([[1.0]], [0.0])))


def mock(*args, dialect="smtlib", timeout=30):
    return SolverAdapter("m", ("{python}", "-m", "verimux.dispatch.mock_solver", *args, "{problem}"),
                         dialect, timeout)


# -- s-expressions -----------------------------------------------------------------

def test_sexpr_round_trip():
    text = '(assert (>= X_0 (- 0.5)))'
    (e,) = parse_all(text)
    assert dump(e) == text
    assert to_fraction(["-", "0.5"]) == Fraction(-1, 2)
    assert to_fraction(["/", "1.0", "3.0"]) == Fraction(1, 3)
    assert decimal(Fraction(1, 4)) == "0.25"
    assert decimal(Fraction(-1, 3)) == "(- (/ 1.0 3.0))"
    with pytest.raises(UnparseableOutput):
        parse_all("(a (b)")


# -- SMT-LIB -----------------------------------------------------------------------

def test_smtlib_identity_example():
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 0.5)))
    text = emit_smtlib(negated(p))
    assert text.count("ite") == 1
    assert "(assert (> Y_0 0.5))" in text
    assert "(assert (>= X_0 0.0))" in text and "(assert (<= X_0 1.0))" in text
    assert text.endswith("(check-sat)\n(get-model)\n")
    assert text == emit_smtlib(negated(p))
    assert text.isascii() and "\r" not in text


def test_smtlib_affine_net_has_no_ite(rng):
    net = random_net(rng, [2, 3, 2], relu=False)
    text = emit_smtlib(negated(VerificationProblem(Box((0, 0), (1, 1)), net, goal(le(0, 1)))))
    assert "ite" not in text


def test_smtlib_errors():
    svm = SvmModel("rbf", (DecisionFunction([[0.0]], [1.0], 0.0),), gamma=1.0)
    p = VerificationProblem(Box((0,), (1,)), svm, goal(le(0, 1)))
    with pytest.raises(UnsupportedModel):
        emit_smtlib(negated(p))
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), NormalizedGoal.true())
    with pytest.raises(EmptyConstraint):
        emit_smtlib(negated(p))
    with pytest.raises(ValueError):
        emit_smtlib(p)


def test_linear_svm_emits(rng):
    svm = SvmModel("linear", (DecisionFunction([[1.0, 2.0]], [0.5], 0.1),
                              DecisionFunction([[0.0, 1.0]], [1.0], 0.0)))
    p = VerificationProblem(Box((0, 0), (1, 1)), svm, goal(le(0, 5)))
    assert decide_script(emit_smtlib(negated(p))).status == "unsat"


# -- VNN-LIB -----------------------------------------------------------------------

def test_vnnlib_robustness_example(rng):
    net = random_net(rng, [2, 4, 3])
    p = robustness_problem(net, [0.1, 0.2], 0.05, label=1)
    text = emit_vnnlib(negated(p))
    assert text.count("declare-const") == 5
    assert "Y_0" in text and "Y_2" in text
    assert "<" not in text.replace("<=", "")


def test_vnnlib_input_atom(rng):
    net = random_net(rng, [2, 3, 1])
    a = LinearConstraint(((0, Fraction(1)),), ((1, Fraction(-1)),), "<=", Fraction(0))
    text = emit_vnnlib(negated(VerificationProblem(Box((0, 0), (1, 1)), net, goal(a))))
    assert "X_1" in text.split("(assert (<= X_1 1.0))")[-1]


def test_vnnlib_checker_round_trip():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        p = desk_problem(rng)
        prop = check_vnnlib(emit_vnnlib(negated(p)))
        assert prop.num_inputs == p.model.input_dim and prop.num_outputs == p.model.output_dim
        assert prop.input_box() == p.input_region
        bad = p.violation
        for x in rng.uniform(-1.5, 1.5, size=(200, p.model.input_dim)):
            y = eval_model(p.model, x)
            expect = p.input_region.contains(x) and bad.holds(y, x, margin=1e-9)
            if expect:
                assert prop.holds(x, y)
            if not p.input_region.contains(x):
                assert not prop.holds(x, y)


def test_vnnlib_checker_rejects():
    with pytest.raises(UnparseableOutput):
        check_vnnlib("(declare-const X_0 Real)\n(assert (< X_0 1.0))\n")
    with pytest.raises(UnparseableOutput):
        check_vnnlib("(declare-const X_1 Real)\n")
    with pytest.raises(UnparseableOutput):
        check_vnnlib("(assert (<= X_0 1.0)")


# -- process boundary --------------------------------------------------------------

def test_run_external_unsat(tmp_path):
    f = tmp_path / "p.smt2"
    f.write_text("(check-sat)\n")
    r = run_external(mock("--respond", "unsat"), {"problem": str(f)})
    assert r.stdout.strip() == "unsat" and not r.timed_out and r.exit_status == 0


def test_run_external_timeout(tmp_path):
    f = tmp_path / "p.smt2"
    f.write_text("(check-sat)\n")
    r = run_external(mock("--sleep", "5", "--respond", "unsat"), {"problem": str(f)}, timeout=0.5)
    assert r.timed_out and r.wall_time < 4
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 2)))
    assert parse_solver_result(r, "smtlib", negated(p)).tag == TIMEOUT


def test_run_external_missing(tmp_path):
    f = tmp_path / "p.smt2"
    f.write_text("")
    a = SolverAdapter("nope", ("no-such-solver-binary", "{problem}"))
    with pytest.raises(ExecutableNotFound):
        run_external(a, {"problem": str(f)})
    with pytest.raises(FileNotFoundError):
        run_external(mock(), {"problem": str(tmp_path / "absent.smt2")})
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 2)))
    assert solve_external(p, a).tag == ERROR


def raw(stdout, code=0):
    return RawSolverResult(code, stdout, "", 0.01)


def test_parse_solver_result():
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 0.5)))
    q = negated(p)
    assert parse_solver_result(raw("unsat\n"), "smtlib", q).tag == VALID
    assert parse_solver_result(raw("unsat\n"), "smtlib", p).tag == ERROR
    assert parse_solver_result(raw("unknown\n"), "smtlib", q).tag == UNKNOWN
    assert parse_solver_result(raw("segfault!!\n", 139), "smtlib", q).tag == ERROR
    v = parse_solver_result(raw("sat\n(\n (define-fun X_0 () Real 0.75)\n)\n"), "smtlib", q)
    assert v.tag == FALSIFIED and v.witness[0] == 0.75
    v = parse_solver_result(raw("sat\n((define-fun X_0 () Real (/ 1.0 4.0)))"), "smtlib", q)
    assert v.tag == ERROR and "mismatch" in v.message
    v = parse_solver_result(raw("sat\n((define-fun X_0 () Real 0.5))"), "smtlib", q)
    assert v.tag == UNKNOWN
    v = parse_solver_result(raw("sat\n((X_0 0.9)\n(Y_0 0.9))"), "vnncomp", q)
    assert v.tag == FALSIFIED


def test_adapter_registry(tmp_path):
    f = tmp_path / "a.json"
    f.write_text('{"adapters": [{"id": "mine", "command": "mysolver {problem}", "dialect": "smtlib"}]}')
    reg = load_adapters(f)
    assert reg["mine"].command == ("mysolver", "{problem}") and "mock-smt" in reg
    f.write_text('[{"id": "bad", "command": "mysolver"}]')
    with pytest.raises(SchemaError):
        load_adapters(f)


@pytest.mark.parametrize("engine", ["mock-smt", "mock-vnn"])
def test_mock_solvers_end_to_end(engine, rng):
    net = NetworkGraph((Dense([[1.0, 1.0], [-1.0, -1.0]], [0.0, 0.0]), ReLU(),
                        Dense([[1.0, -1.0], [-1.0, 1.0]], [-0.3, 0.3])))
    a = BUILTIN_ADAPTERS[engine]
    assert solve_external(robustness_problem(net, [0.6, 0.6], 0.1), a).tag == VALID
    v = solve_external(robustness_problem(net, [0.6, 0.6], 0.5), a)
    assert v.tag == FALSIFIED and robustness_problem(net, [0.6, 0.6], 0.5).check_witness(v.witness)


def test_emit_files_nnet(tmp_path, rng):
    p = robustness_problem(random_net(rng, [2, 3, 2]), [0, 0], 0.1)
    files = emit_files(p, "vnnlib", tmp_path, "g")
    assert files["model"].endswith(".nnet")
    odd = NetworkGraph((Dense(np.eye(2), np.zeros(2)), Dense(np.eye(2), np.zeros(2))))
    files = emit_files(robustness_problem(odd, [0, 0], 0.1), "vnnlib", tmp_path, "h")
    assert files["model"].endswith(".json")


# -- phase oracle ------------------------------------------------------------------

def test_phase_oracle_examples():
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 0.5)))
    r = decide_script(emit_smtlib(negated(p)))
    assert r.status == "sat" and r.assignment["X_0"] > 0.5
    p = VerificationProblem(Box((0,), (1,)), relu_identity(), goal(le(0, 1)))
    assert decide_script(emit_smtlib(negated(p))).status == "unsat"


def test_phase_oracle_matches_analyzer():
    agree = 0
    for seed in range(12):
        p = desk_problem(np.random.default_rng(seed))
        r = decide_script(emit_smtlib(negated(p)))
        v = verify_goal(p)
        if r.status == "sat":
            x = np.array([r.assignment[f"X_{i}"] for i in range(p.model.input_dim)])
            assert p.check_witness(x, 0.0)
        if v.tag in (VALID, FALSIFIED) and r.status != "unknown":
            assert (v.tag == VALID) == (r.status == "unsat")
            agree += 1
    assert agree >= 8
