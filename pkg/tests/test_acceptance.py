"""Acceptance criteria 1-8. Each test records a PASS/FAIL line printed at the end of the run."""

import json
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import (corner_points, desk_problem, goal, grid_min_margin, le, random_box, random_net,
                     random_sizes, robustness_problem, sample_box)
from verimux import cli
from verimux.analyzer import AnalyzerConfig, propagate_affine, propagate_box, verify_goal
from verimux.dispatch import BUILTIN_ADAPTERS, solve_external
from verimux.metamorphic import Transformation, agreement_table, make_equivariant_network
from verimux.model import (Dataset, DecisionFunction, Dense, NetworkGraph, ReLU, Row, SvmModel,
                           eval_batch, eval_model, load_model, write_native_model)
from verimux.orchestrator import RunConfig, run_problems
from verimux.problem import (Box, NormalizedGoal, VerificationProblem, negate_goal, normalize)
from verimux.problem.goal import ClassIs, ClassIsNot, LinearConstraint
from verimux.verdict import ERROR, FALSIFIED, TIMEOUT, UNKNOWN, VALID

RTOL = 1e-9


def within(Y, box):
    slack = RTOL * np.maximum(1.0, np.abs(Y))
    return bool(np.all(Y >= box.lower - slack) and np.all(Y <= box.upper + slack))


def soundness_nets():
    rng = np.random.default_rng(1)
    out = []
    for _ in range(100):
        sizes = random_sizes(rng, max_in=4, max_hidden=8, max_layers=4)
        out.append((random_net(rng, sizes), random_box(rng, sizes[0])))
    return out


@pytest.mark.criterion(1, "soundness of box and affine bounds on 100 random networks")
def test_soundness(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    bad = 0
    for net, box in soundness_nets():
        Y = eval_batch(net, sample_box(rng, box, 10_000))
        Y = np.vstack([Y, eval_batch(net, corner_points(box))])
        if not within(Y, propagate_box(net, box)) or not within(Y, propagate_affine(net, box)[1]):
            bad += 1
    elapsed = time.perf_counter() - start
    criterion["detail"] = f"{bad} unsound of 100, {elapsed:.1f}s"
    assert bad == 0
    assert elapsed < 60


@pytest.mark.criterion(2, "affine dominance (100 nets) and exactness on affine nets (50)")
def test_dominance_and_exactness(criterion):
    not_dominated = 0
    for net, box in soundness_nets():
        ib, ab = propagate_box(net, box), propagate_affine(net, box)[1]
        tol = RTOL * np.maximum(1.0, np.abs(ib.upper) + np.abs(ib.lower))
        if np.any(ab.lower < ib.lower - tol) or np.any(ab.upper > ib.upper + tol):
            not_dominated += 1
    rng = np.random.default_rng(3)
    inexact = 0
    for _ in range(50):
        sizes = random_sizes(rng, max_in=4, max_hidden=8, max_layers=4)
        net, box = random_net(rng, sizes, relu=False), random_box(rng, sizes[0])
        Y = eval_batch(net, corner_points(box))
        ab = propagate_affine(net, box)[1]
        scale = np.maximum(1.0, np.abs(Y).max(axis=0))
        if (np.any(np.abs(ab.lower - Y.min(axis=0)) > RTOL * scale)
                or np.any(np.abs(ab.upper - Y.max(axis=0)) > RTOL * scale)):
            inexact += 1
    criterion["detail"] = f"{not_dominated} not dominated, {inexact} inexact"
    assert not_dominated == 0 and inexact == 0


def ground_truth_problems(count=40):
    """Problems whose grid oracle (step 1e-3) decides with margin > 1e-6, balanced by truth."""
    rng = np.random.default_rng(4)
    widths = {1: 0.8, 2: 0.3, 3: 0.04}
    want = {VALID: count // 2, FALSIFIED: count - count // 2}
    out = []
    while any(want.values()):
        n = int(rng.integers(1, 4))
        net = random_net(rng, [n, int(rng.integers(2, 7)), int(rng.integers(2, 4))])
        w = widths[n] * rng.uniform(0.3, 1.0)
        center = rng.uniform(-1, 1, n)
        if rng.random() < 0.5:
            p = robustness_problem(net, center, w / 2)
        else:
            box = Box.from_floats(center - w / 2, center + w / 2)
            ib = propagate_box(net, box)
            j = int(rng.integers(net.output_dim))
            bound = round(ib.lower[j] + rng.uniform(0.3, 1.0) * (ib.upper[j] - ib.lower[j]), 4)
            p = VerificationProblem(box, net, goal(le(j, bound)))
        margin, _ = grid_min_margin(p, 1e-3)
        truth = VALID if margin > 1e-6 else FALSIFIED if margin < -1e-6 else None
        if truth is not None and want[truth] > 0:
            want[truth] -= 1
            out.append((p, truth))
    return out


@pytest.mark.criterion(3, "verify_goal agrees with the grid oracle on 40 problems")
def test_ground_truth(criterion):
    start = time.perf_counter()
    counts = {VALID: 0, FALSIFIED: 0, UNKNOWN: 0, "wrong": 0}
    for p, truth in ground_truth_problems():
        v = verify_goal(p, AnalyzerConfig(split_budget=512, max_depth=24))
        if v.tag == UNKNOWN:
            counts[UNKNOWN] += 1
        elif v.tag == truth and (v.tag == VALID or p.check_witness(v.witness)):
            counts[v.tag] += 1
        else:
            counts["wrong"] += 1
    elapsed = time.perf_counter() - start
    criterion["detail"] = (f"{counts[VALID]} Valid, {counts[FALSIFIED]} Falsified, "
                           f"{counts[UNKNOWN]} Unknown, {counts['wrong']} wrong, {elapsed:.1f}s")
    assert counts["wrong"] == 0
    assert elapsed < 120


def random_goal(rng, n_out=3, n_in=2):
    def atom():
        r = rng.random()
        if r < 0.25:
            c = int(rng.integers(n_out))
            return ClassIs(c) if rng.random() < 0.5 else ClassIsNot(c)
        oc = tuple((k, Fraction(int(v))) for k, v in enumerate(rng.integers(-3, 4, n_out)) if v)
        ic = tuple((k, Fraction(int(v))) for k, v in enumerate(rng.integers(-3, 4, n_in)) if v)
        return LinearConstraint(oc, ic, "<" if rng.random() < 0.5 else "<=",
                                Fraction(int(rng.integers(-5, 6))))
    return NormalizedGoal.of([[atom() for _ in range(int(rng.integers(1, 4)))]
                              for _ in range(int(rng.integers(1, 4)))])


@pytest.mark.criterion(4, "double negation equals normalization; Q and not Q are complementary")
def test_negation(criterion):
    rng = np.random.default_rng(5)
    net = NetworkGraph((Dense(np.ones((3, 2)), np.zeros(3)),))
    goals = [random_goal(rng) for _ in range(200)]
    mismatched = 0
    for g in goals:
        p = VerificationProblem(Box((0, 0), (1, 1)), net, g)
        if negate_goal(negate_goal(p)) != normalize(p):
            mismatched += 1
    overlaps = 0
    for k in range(1000):
        g = goals[k % 200]
        y, x = rng.normal(size=3), rng.normal(size=2)
        if g.holds(y, x) == g.negate().holds(y, x):
            overlaps += 1
    criterion["detail"] = f"{mismatched}/200 involution failures, {overlaps}/1000 overlaps"
    assert mismatched == 0 and overlaps == 0


@pytest.mark.criterion(5, "SMT encodings agree with the analyzer; sat models are real violations")
def test_emission_semantics(criterion):
    rng = np.random.default_rng(6)
    problems = [desk_problem(rng) for _ in range(30)]
    adapter = BUILTIN_ADAPTERS["mock-smt"]
    compared = disagreements = fake_models = sat = 0
    for p in problems:
        s = solve_external(p, adapter, timeout=60)
        a = verify_goal(p)
        if s.tag == FALSIFIED:
            sat += 1
            if not p.check_witness(s.witness):
                fake_models += 1
        elif s.tag == ERROR:
            fake_models += 1
        if a.tag in (VALID, FALSIFIED) and s.tag in (VALID, FALSIFIED):
            compared += 1
            disagreements += a.tag != s.tag
    criterion["detail"] = (f"{compared} compared, {disagreements} disagreements, "
                           f"{sat} sat models, {fake_models} bad")
    assert disagreements == 0 and fake_models == 0
    assert compared >= 25


@pytest.mark.criterion(6, "equivariant classifiers agree 100%; a 10% weight change breaks it")
def test_metamorphic_methodology(criterion):
    rng = np.random.default_rng(7)
    t = Transformation.permutation([1, 0, 3, 2, 4], sigma_out=[0, 2, 1, 4, 3])
    exact, sensitive = 0, 0
    worst = []
    for _ in range(5):
        net = make_equivariant_network(Dense(rng.normal(size=(8, 5)), rng.normal(size=8)),
                                       Dense(rng.normal(size=(5, 8)), rng.normal(size=5)), t)
        X = rng.normal(size=(2000, 5))
        data = Dataset(tuple(Row(x) for x in X), 5)
        tab = agreement_table(net, data, t)
        if all(r.percentage in (None, 100.0) for r in tab.rows):
            exact += 1
        w2 = net.layers[2].weights.copy()
        i, j = np.unravel_index(np.argmax(np.abs(w2)), w2.shape)
        w2[i, j] *= 1.1
        bent = NetworkGraph((net.layers[0], ReLU(), Dense(w2, net.layers[2].bias)))
        tab = agreement_table(bent, data, t)
        pct = [r.percentage for r in tab.rows if r.percentage is not None]
        worst.append(min(pct))
        if min(pct) < 100.0:
            sensitive += 1
    criterion["detail"] = (f"{exact}/5 exact, {sensitive}/5 sensitive, lowest class "
                           + "/".join(f"{v:.1f}" for v in worst))
    assert exact == 5 and sensitive == 5


@pytest.mark.criterion(7, "reports identical at parallelism 1 and 8; exit codes follow the rules")
def test_orchestration(criterion):
    rng = np.random.default_rng(8)
    problems = []
    for k in range(12):
        net = random_net(rng, [2, 5, 3])
        p = robustness_problem(net, rng.uniform(-1, 1, 2), float(rng.choice([0.01, 0.3, 1.0])))
        problems.append(p)
    engines = ("builtin-box", "builtin-affine", "metamorphic", "mock-smt")
    a = run_problems(problems, RunConfig(engines=engines, parallelism=1))
    b = run_problems(problems, RunConfig(engines=engines, parallelism=8))
    tags = [g.combined.tag for g in a.goals]
    want = (3 if ERROR in tags else 10 if FALSIFIED in tags
            else 20 if UNKNOWN in tags or TIMEOUT in tags else 0)
    singles = [run_problems([p], RunConfig(engines=("builtin-affine",))).exit_status
               for p in problems[:4]]
    single_ok = all(code == {VALID: 0, FALSIFIED: 10, UNKNOWN: 20}[g.combined.tag]
                    for code, g in zip(singles, a.goals[:4])
                    if g.combined.tag in (VALID, FALSIFIED, UNKNOWN))
    criterion["detail"] = f"combined {sorted(set(tags))}, exit {a.exit_status}"
    assert a.content() == b.content()
    assert a.exit_status == b.exit_status == want
    assert single_ok


@pytest.mark.criterion(8, "robust_to(model, a, 0.5) over a 5-row CSV through verify with two engines")
def test_end_to_end(criterion, tmp_path, capsys):
    svm = SvmModel("linear", (DecisionFunction([[1.0, 0.0], [0.5, 0.5]], [0.8, 0.4], 0.0),
                              DecisionFunction([[0.0, 1.0], [0.5, 0.5]], [0.8, 0.4], 0.0)))
    (tmp_path / "svm.json").write_text(write_native_model(svm))
    (tmp_path / "data.csv").write_text("2.0,0.0\n0.2,0.0\n0.0,3.0\n1.0,1.5\n-1.0,-3.0\n")
    (tmp_path / "goal.mls").write_text(
        'model svm_apply from "svm.json"\n'
        'goal fig3: forall a: vector 2. robust_to(svm_apply, a, 0.5)\n')
    report = tmp_path / "report.json"
    code = cli.main(["verify", "--spec", str(tmp_path / "goal.mls"), "--dataset",
                     str(tmp_path / "data.csv"), "--engine", "builtin-affine", "--engine", "mock-smt",
                     "--format", "json", "--output", str(report)])
    rep = json.loads(report.read_text())
    model = load_model(tmp_path / "svm.json")
    rows = np.loadtxt(tmp_path / "data.csv", delimiter=",")
    per_sample = [g["sample"] for g in rep["goals"]]
    engines_ok = all([e["engine"] for e in g["engines"]] == ["builtin-affine", "mock-smt"]
                     for g in rep["goals"])
    reverified = 0
    witnesses = 0
    for g in rep["goals"]:
        center = rows[g["sample"]]
        label = int(np.argmax(eval_model(model, center)))
        for v in [e["verdict"] for e in g["engines"]] + [g["combined"]]:
            if v["tag"] == FALSIFIED:
                witnesses += 1
                x = np.array(v["witness"])
                in_box = np.all(np.abs(x - center) <= 0.5 + 1e-12)
                s = eval_model(model, x)
                if in_box and not s[label] > np.delete(s, label).max():
                    reverified += 1
    tags = [g["combined"]["tag"] for g in rep["goals"]]
    criterion["detail"] = f"exit {code}, combined {tags}, {reverified}/{witnesses} witnesses re-verify"
    assert per_sample == [0, 1, 2, 3, 4] and engines_ok
    assert tags == [VALID, FALSIFIED, VALID, FALSIFIED, VALID]
    assert witnesses > 0 and reverified == witnesses
    assert code == 10
