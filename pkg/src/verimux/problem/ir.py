"""Verification problems ``(X, f, P, Q)`` and the transformations applied to them."""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import PartitionTooLarge, UnboundedInputRegion, UnsupportedFormulaShape
from ..model import Dataset, Model, eval_model
from ..speclang import ast as A
from ..speclang.expand import expand_goal, substitute
from ..speclang.typecheck import TypedSpec
from .box import Box
from .goal import LinearConstraint, NormalizedGoal, normalize_goal, normalize_linear

PROOF = "proof"
FALSIFICATION = "falsification"

DEFAULT_PARTITION_LIMIT = 4096


@dataclass(frozen=True)
class VerificationProblem:
    """One verification goal ``forall x in box. P(x) -> Q(f(x), x)``.

    ``output_constraint`` is ``Q`` under proof polarity and ``not Q`` under
    falsification polarity. ``constraints`` holds every input atom of ``P``
    (the box is their bounding box); ``residual`` is the subset that the box
    does not capture exactly.
    """
    input_region: Box
    model: Model
    output_constraint: NormalizedGoal
    polarity: str = PROOF
    constraints: Tuple[LinearConstraint, ...] = ()
    residual: Tuple[LinearConstraint, ...] = ()
    goal: str = ""
    sample: Optional[int] = None
    model_id: str = "f"

    def __post_init__(self):
        if self.polarity not in (PROOF, FALSIFICATION):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if self.model.input_dim != self.input_region.dim:
            raise ValueError(
                f"box has {self.input_region.dim} dimensions, model takes {self.model.input_dim}")

    @property
    def name(self) -> str:
        return self.goal if self.sample is None else f"{self.goal}[{self.sample}]"

    @property
    def claim(self) -> NormalizedGoal:
        """``Q`` regardless of polarity."""
        return self.output_constraint if self.polarity == PROOF else self.output_constraint.negate()

    @property
    def violation(self) -> NormalizedGoal:
        """``not Q`` regardless of polarity."""
        return self.output_constraint.negate() if self.polarity == PROOF else self.output_constraint

    def precondition_holds(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if not self.input_region.contains(x):
            return False
        y = np.zeros(0)
        return all(a.holds(y, x) for a in self.constraints)

    def check_witness(self, x, tolerance: float = 1e-9) -> bool:
        """True when ``x`` satisfies P and violates Q by more than ``tolerance``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_region.dim,) or not np.all(np.isfinite(x)):
            return False
        if not self.precondition_holds(x):
            return False
        return self.violation.holds(eval_model(self.model, x), x, margin=tolerance)

    def with_box(self, box: Box) -> "VerificationProblem":
        return dataclasses.replace(self, input_region=box)


def normalize(p: VerificationProblem) -> VerificationProblem:
    return dataclasses.replace(p, output_constraint=p.output_constraint.canonical())


def negate_goal(p: VerificationProblem) -> VerificationProblem:
    """Switch polarity; the output constraint is negated and kept in normal form."""
    pol = FALSIFICATION if p.polarity == PROOF else PROOF
    return dataclasses.replace(p, polarity=pol, output_constraint=p.output_constraint.negate())


def split_goals(p: VerificationProblem, k: int,
                limit: int = DEFAULT_PARTITION_LIMIT) -> list[VerificationProblem]:
    """Partition the input box into ``k`` equal slices per dimension."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = p.input_region.dim
    if k ** n > limit:
        raise PartitionTooLarge(f"{k}^{n} = {k ** n} subboxes exceeds the limit of {limit}")
    if k == 1:
        return [p]
    box = p.input_region
    cuts = [[box.lo[i] + (box.hi[i] - box.lo[i]) * Fraction(j, k) for j in range(k + 1)]
            for i in range(n)]
    out = []
    for idx in itertools.product(range(k), repeat=n):
        lo = tuple(cuts[i][j] for i, j in enumerate(idx))
        hi = tuple(cuts[i][j + 1] for i, j in enumerate(idx))
        out.append(p.with_box(Box(lo, hi)))
    return out


# -- building problems from a typed spec ------------------------------------------

def _conjuncts(f):
    if isinstance(f, A.And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    if isinstance(f, A.BoolLit) and f.value:
        return []
    return [f]


def _has_model(f) -> bool:
    return any(isinstance(n, A.ModelApply) for n in A.walk(f))


def _prenex(f: A.Formula):
    """Split ``forall xs. P1 -> forall ys. P2 -> Q`` into binders, P parts, and Q."""
    binders, pre = [], []
    while True:
        if isinstance(f, A.Forall):
            binders.append((f.var, f.var_sort))
            f = f.body
        elif isinstance(f, A.Exists):
            raise UnsupportedFormulaShape("existential goals are not supported; state the universal form")
        elif isinstance(f, A.Implies) and not _has_model(f.left):
            pre.extend(_conjuncts(f.left))
            f = f.right
        else:
            return binders, pre, f


def _bounded_vars(pre, binders) -> set:
    """Variables whose every coordinate gets a lower and upper bound from single-variable atoms."""
    out = set()
    for var, sort in binders:
        if sort.kind not in ("vector", "real"):
            continue
        dim = sort.dim if sort.kind == "vector" else 1
        lo, hi = set(), set()
        for atom in pre:
            if A.free_vars(atom) != {var}:
                continue
            try:
                nf = normalize_linear(atom, var)
            except UnsupportedFormulaShape:
                continue
            if len(nf.disjuncts) != 1:
                continue
            for c in nf.disjuncts[0]:
                if len(c.in_coeffs) == 1:
                    (i, k), = c.in_coeffs
                    (hi if k > 0 else lo).add(i)
        if all(i in lo and i in hi for i in range(dim)):
            out.add(var)
    return out


def _fold_models(f, models: Mapping[str, Model]):
    """Evaluate model applications whose argument is a constant vector."""
    def go(node):
        if isinstance(node, A.ModelApply) and isinstance(node.arg, A.VecLit):
            x = np.array([float(Fraction(v)) for v in node.arg.items])
            y = eval_model(models[node.model], x)
            return A.VecLit(tuple(repr(float(v)) for v in y), span=node.span, sort=node.sort)
        if isinstance(node, A.PredApply):
            return dataclasses.replace(node, args=tuple(go(a) for a in node.args))
        changes = {}
        for fld in dataclasses.fields(node):
            if fld.name in ("span", "sort"):
                continue
            v = getattr(node, fld.name)
            if isinstance(v, A.Node):
                changes[fld.name] = go(v)
        return dataclasses.replace(node, **changes) if changes else node
    return go(f)


def _replace_outputs(q, x: str, out_name: str):
    """Rewrite ``M(x)`` to the output variable; returns (formula, model id)."""
    found = set()

    def go(node):
        if isinstance(node, A.ModelApply):
            if not (isinstance(node.arg, A.Var) and node.arg.name == x):
                raise UnsupportedFormulaShape(
                    f"model {node.model} must be applied directly to the input variable {x!r}")
            found.add(node.model)
            return A.Var(out_name, span=node.span, sort=node.sort)
        changes = {}
        for fld in dataclasses.fields(node):
            if fld.name in ("span", "sort"):
                continue
            v = getattr(node, fld.name)
            if isinstance(v, A.Node):
                changes[fld.name] = go(v)
        return dataclasses.replace(node, **changes) if changes else node

    out = go(q)
    if not found:
        raise UnsupportedFormulaShape("goal does not apply any model to its input")
    if len(found) > 1:
        raise UnsupportedFormulaShape(f"goal mixes several models {sorted(found)}; compose them first")
    return out, found.pop()


def _box_from(atoms: Sequence[LinearConstraint], dim: int, var: str):
    lo: Dict[int, Fraction] = {}
    hi: Dict[int, Fraction] = {}
    residual = []
    for a in atoms:
        if len(a.in_coeffs) == 1:
            (i, k), = a.in_coeffs
            v = a.bound / k
            if k > 0:
                hi[i] = min(hi.get(i, v), v)
            else:
                lo[i] = max(lo.get(i, v), v)
        else:
            residual.append(a)
    missing = [i for i in range(dim) if i not in lo or i not in hi]
    if missing:
        raise UnboundedInputRegion(
            f"input {var!r} has no finite bounds on coordinate(s) {missing}; "
            "bound it in the goal or supply a dataset")
    for i in range(dim):
        if lo[i] > hi[i]:
            raise UnsupportedFormulaShape(f"empty input region on coordinate {i} of {var!r}")
    return tuple(lo[i] for i in range(dim)), tuple(hi[i] for i in range(dim)), tuple(residual)


def build_goal_problems(name: str, body: A.Formula, spec: TypedSpec, models: Mapping[str, Model],
                        dataset: Optional[Dataset] = None, clamp=None) -> list[VerificationProblem]:
    goal = expand_goal(body, spec)
    binders, pre, q = _prenex(goal)
    for var, sort in binders:
        if sort.kind not in ("vector", "real"):
            raise UnsupportedFormulaShape(f"cannot quantify over {sort} at goal level")
    bounded = _bounded_vars(pre, binders)
    for var, sort in binders:
        if sort.kind == "real":
            if var not in bounded:
                raise UnboundedInputRegion(f"real input {var!r} is unconstrained")
            raise UnsupportedFormulaShape(
                f"scalar input {var!r} cannot feed a model; declare it as vector 1")
    unbounded = [(v, s) for v, s in binders if v not in bounded]

    instantiations: list = [(None, None)]
    anchor = None
    if unbounded and dataset is not None and len(binders) > 1:
        anchor = unbounded[0]
        if anchor[1].dim != dataset.feature_dim:
            raise UnboundedInputRegion(
                f"dataset rows have {dataset.feature_dim} features but {anchor[0]!r} "
                f"is a vector {anchor[1].dim}")
        instantiations = list(enumerate(dataset.rows))
    elif unbounded and len(binders) == 1 and dataset is not None:
        # the input ranges over the finite sample set itself: one point box per row
        var, sort = unbounded[0]
        if sort.dim != dataset.feature_dim:
            raise UnboundedInputRegion(
                f"dataset rows have {dataset.feature_dim} features but {var!r} is a vector {sort.dim}")
        return [_point_problem(name, var, q, models, k, row) for k, row in enumerate(dataset.rows)]

    out = []
    for index, row in instantiations:
        pre_i, q_i, vars_i = pre, q, [b for b in binders]
        if anchor is not None:
            const = A.VecLit(row.text, sort=anchor[1])
            sub = {anchor[0]: const}
            pre_i = [_fold_models(substitute(a, sub), models) for a in pre]
            q_i = _fold_models(substitute(q, sub), models)
            vars_i = [b for b in binders if b[0] != anchor[0]]
        if len(vars_i) != 1:
            if not vars_i:
                raise UnsupportedFormulaShape("goal has no free input once instantiated")
            names = [v for v, _ in vars_i]
            bounded_i = _bounded_vars(pre_i, vars_i)
            if len(bounded_i) < len(names):
                raise UnboundedInputRegion(
                    f"variables {sorted(set(names) - bounded_i)} are unconstrained")
            raise UnsupportedFormulaShape(f"goal quantifies over several inputs {names}")
        x, xsort = vars_i[0]
        yname = "__out"
        q_rw, model_id = _replace_outputs(q_i, x, yname)
        model = models[model_id]
        if _has_model(A.conj(pre_i)):
            raise UnsupportedFormulaShape("preconditions may not mention model outputs")
        pnf = normalize_linear(A.conj(pre_i), x)
        if len(pnf.disjuncts) != 1:
            raise UnsupportedFormulaShape(
                "precondition must be a conjunction of linear input constraints"
                if pnf.disjuncts else "precondition is unsatisfiable")
        atoms = pnf.disjuncts[0]
        lo, hi, residual = _box_from(atoms, xsort.dim, x)
        if clamp is not None:
            clo, chi = Fraction(clamp[0]), Fraction(clamp[1])
            lo = tuple(max(v, clo) for v in lo)
            hi = tuple(min(v, chi) for v in hi)
            if any(a > b for a, b in zip(lo, hi)):
                raise UnsupportedFormulaShape("input region is empty after clamping")
        claim = normalize_goal(q_rw, model.output_dim, output_var=yname, input_var=x,
                               keep_class_atoms=True)
        out.append(VerificationProblem(Box(lo, hi), model, claim, PROOF, tuple(atoms), residual,
                                       goal=name, sample=index, model_id=model_id))
    return out


def _point_problem(name, x, q, models, index, row) -> VerificationProblem:
    q_rw, model_id = _replace_outputs(q, x, "__out")
    model = models[model_id]
    point = tuple(Fraction(t) for t in row.text)
    claim = normalize_goal(q_rw, model.output_dim, output_var="__out", input_var=x,
                           keep_class_atoms=True)
    return VerificationProblem(Box(point, point), model, claim, PROOF, goal=name, sample=index,
                               model_id=model_id)


def build_problems(spec: TypedSpec, models: Mapping[str, Model],
                   datasets: Optional[Mapping[str, Dataset]] = None,
                   clamp=None) -> list[VerificationProblem]:
    """One problem per goal, or per goal and dataset row for sample-anchored goals.

    ``datasets`` maps goal names to datasets; the key ``"*"`` applies to every
    goal without its own entry. ``clamp`` optionally intersects each box with
    ``[lo, hi]`` in every coordinate.
    """
    datasets = datasets or {}
    out = []
    for g in spec.goals:
        ds = datasets.get(g.name, datasets.get("*"))
        out.extend(build_goal_problems(g.name, g.body, spec, models, ds, clamp))
    return out
