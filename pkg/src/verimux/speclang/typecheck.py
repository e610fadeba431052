"""Sort checking for ``.mls`` modules."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, Mapping

from ..errors import (
    DimensionMismatch,
    RecursivePredicate,
    SortMismatch,
    UnboundIdentifier,
    UnknownModel,
)
from . import ast as A


@dataclass(frozen=True)
class ModelSignature:
    num_input: int
    num_classes: int
    kind: str = "network"  # network | svm | pipeline

    def __post_init__(self):
        if self.num_input < 1 or self.num_classes < 1:
            raise ValueError("model signature dimensions must be positive")


# stdlib predicate parameter shapes; "n" means "any vector, all equal"
STDLIB = {
    "dist_linf": ("vector", "vector", "real"),
    "robust_to": ("model", "vector", "real"),
}


@dataclass
class TypedSpec:
    module: A.SpecModule
    sigs: Dict[str, ModelSignature]
    predicates: Dict[str, A.PredicateDef] = field(default_factory=dict)

    @property
    def goals(self):
        return self.module.goals

    def model_of_import(self, name):
        return self.sigs[name]


def _pos(node):
    sp = getattr(node, "span", None)
    return (sp.line, sp.col) if sp else (0, 0)


class Checker:
    def __init__(self, sigs: Mapping[str, ModelSignature], preds: Mapping[str, A.PredicateDef]):
        self.sigs = dict(sigs)
        self.preds = dict(preds)

    # -- terms -----------------------------------------------------------------
    def term(self, t: A.Term, scope: Mapping[str, A.Sort]) -> A.Term:
        line, col = _pos(t)
        if isinstance(t, A.Var):
            if t.name in scope:
                return dataclasses.replace(t, sort=scope[t.name])
            if t.name in self.sigs:
                return dataclasses.replace(t, sort=A.MODEL)
            raise UnboundIdentifier(f"unbound identifier {t.name!r}", line, col)
        if isinstance(t, A.RealLit):
            return dataclasses.replace(t, sort=A.REAL)
        if isinstance(t, A.IntLit):
            return dataclasses.replace(t, sort=A.INT)
        if isinstance(t, A.VecLit):
            return dataclasses.replace(t, sort=A.vector(len(t.items)))
        if isinstance(t, (A.Add, A.Sub, A.Mul)):
            left = self.term(t.left, scope)
            right = self.term(t.right, scope)
            for side in (left, right):
                if not side.sort.numeric:
                    raise SortMismatch("real", side.sort, *_pos(side), what="arithmetic")
            sort = A.INT if left.sort == right.sort == A.INT else A.REAL
            return dataclasses.replace(t, left=left, right=right, sort=sort)
        if isinstance(t, A.Neg):
            arg = self.term(t.arg, scope)
            if not arg.sort.numeric:
                raise SortMismatch("real", arg.sort, *_pos(arg), what="negation")
            return dataclasses.replace(t, arg=arg, sort=arg.sort)
        if isinstance(t, A.ModelApply):
            if t.model not in self.sigs:
                raise UnknownModel(f"unknown model {t.model!r}", line, col)
            sig = self.sigs[t.model]
            arg = self.term(t.arg, scope)
            if arg.sort.kind != "vector":
                raise SortMismatch(A.vector(sig.num_input), arg.sort, *_pos(arg),
                                   what=f"application of {t.model}")
            if arg.sort.dim != sig.num_input:
                raise DimensionMismatch(
                    f"model {t.model} expects vector {sig.num_input}, got vector {arg.sort.dim}",
                    line=line, col=col)
            return dataclasses.replace(t, arg=arg, sort=A.vector(sig.num_classes))
        if isinstance(t, A.Index):
            vec = self.term(t.vec, scope)
            idx = self.term(t.index, scope)
            if vec.sort.kind != "vector":
                raise SortMismatch("vector", vec.sort, *_pos(vec), what="indexing")
            if idx.sort != A.INT:
                raise SortMismatch(A.INT, idx.sort, *_pos(idx), what="index")
            if isinstance(idx, A.IntLit) and not 0 <= idx.value < vec.sort.dim:
                raise DimensionMismatch(
                    f"index {idx.value} out of range for vector {vec.sort.dim}", line=line, col=col)
            return dataclasses.replace(t, vec=vec, index=idx, sort=A.REAL)
        if isinstance(t, A.ArgMax):
            arg = self.term(t.arg, scope)
            if arg.sort.kind != "vector":
                raise SortMismatch("vector", arg.sort, *_pos(arg), what="argmax")
            return dataclasses.replace(t, arg=arg, sort=A.LABEL)
        raise TypeError(f"not a term: {t!r}")

    # -- formulas --------------------------------------------------------------
    def formula(self, f: A.Formula, scope: Mapping[str, A.Sort]) -> A.Formula:
        if isinstance(f, A.BoolLit):
            return f
        if isinstance(f, (A.Forall, A.Exists)):
            inner = dict(scope)
            inner[f.var] = f.var_sort
            return dataclasses.replace(f, body=self.formula(f.body, inner))
        if isinstance(f, (A.And, A.Or, A.Implies)):
            return dataclasses.replace(f, left=self.formula(f.left, scope),
                                       right=self.formula(f.right, scope))
        if isinstance(f, A.Not):
            return dataclasses.replace(f, arg=self.formula(f.arg, scope))
        if isinstance(f, A.Compare):
            return self.compare(f, scope)
        if isinstance(f, A.PredApply):
            return self.pred_apply(f, scope)
        raise TypeError(f"not a formula: {f!r}")

    def compare(self, f: A.Compare, scope):
        left = self.term(f.left, scope)
        right = self.term(f.right, scope)
        ls, rs = left.sort, right.sort
        if ls.numeric and rs.numeric:
            return dataclasses.replace(f, left=left, right=right)
        if A.LABEL in (ls, rs):
            other, other_sort = (right, rs) if ls == A.LABEL else (left, ls)
            if f.op != "=":
                raise SortMismatch("real", A.LABEL, *_pos(f), what=f"comparison '{f.op}'")
            if other_sort == A.LABEL or isinstance(other, A.IntLit):
                return dataclasses.replace(f, left=left, right=right)
            raise SortMismatch(A.LABEL, other_sort, *_pos(other), what="label comparison")
        bad = left if not ls.numeric else right
        raise SortMismatch("real", bad.sort, *_pos(bad), what="comparison")

    def pred_apply(self, f: A.PredApply, scope):
        line, col = _pos(f)
        args = tuple(self.term(a, scope) for a in f.args)
        if f.name in self.preds:
            params = self.preds[f.name].params
            if len(params) != len(args):
                raise SortMismatch(f"{len(params)} arguments", f"{len(args)}", line, col,
                                   what=f"call to {f.name}")
            for (pname, psort), a in zip(params, args):
                if not _assignable(a.sort, psort):
                    raise SortMismatch(psort, a.sort, *_pos(a), what=f"argument {pname} of {f.name}")
            return dataclasses.replace(f, args=args)
        if f.name == "dist_linf":
            if len(args) not in (3, 4):
                raise SortMismatch("3 or 4 arguments", f"{len(args)}", line, col, what="dist_linf")
            a, b, eps = args[:3]
            for v in (a, b):
                if v.sort.kind != "vector":
                    raise SortMismatch("vector", v.sort, *_pos(v), what="dist_linf")
            if a.sort != b.sort:
                raise DimensionMismatch(f"dist_linf between {a.sort} and {b.sort}", line=line, col=col)
            if not eps.sort.numeric:
                raise SortMismatch(A.REAL, eps.sort, *_pos(eps), what="dist_linf epsilon")
            if len(args) == 4:
                n = args[3]
                if not isinstance(n, A.IntLit) or n.value != a.sort.dim:
                    raise DimensionMismatch(
                        f"dist_linf length must be the literal {a.sort.dim}", line=line, col=col)
            return dataclasses.replace(f, args=args)
        if f.name == "robust_to":
            if len(args) != 3:
                raise SortMismatch("3 arguments", f"{len(args)}", line, col, what="robust_to")
            m, a, eps = args
            if m.sort != A.MODEL or not isinstance(m, A.Var):
                raise SortMismatch(A.MODEL, m.sort, *_pos(m), what="robust_to")
            sig = self.sigs[m.name]
            if a.sort.kind != "vector":
                raise SortMismatch(A.vector(sig.num_input), a.sort, *_pos(a), what="robust_to")
            if a.sort.dim != sig.num_input:
                raise DimensionMismatch(
                    f"model {m.name} expects vector {sig.num_input}, got {a.sort}", line=line, col=col)
            if not eps.sort.numeric:
                raise SortMismatch(A.REAL, eps.sort, *_pos(eps), what="robust_to epsilon")
            return dataclasses.replace(f, args=args)
        raise UnboundIdentifier(f"unknown predicate {f.name!r}", line, col)


def _assignable(found: A.Sort, expected: A.Sort) -> bool:
    return found == expected or (found == A.INT and expected == A.REAL)


def _check_recursion(preds: Mapping[str, A.PredicateDef]):
    calls = {
        name: {n.name for n in A.walk(p.body) if isinstance(n, A.PredApply) and n.name in preds}
        for name, p in preds.items()
    }
    state = {}

    def visit(name, stack):
        if state.get(name) == "done":
            return
        if state.get(name) == "active":
            p = preds[name]
            raise RecursivePredicate(
                f"recursive predicate definition: {' -> '.join(stack + [name])}", *_pos(p))
        state[name] = "active"
        for callee in sorted(calls[name]):
            visit(callee, stack + [name])
        state[name] = "done"

    for name in preds:
        visit(name, [])


def typecheck_spec(module: A.SpecModule, sigs: Mapping[str, ModelSignature]) -> TypedSpec:
    """Annotate every term with its sort and reject ill-sorted goals.

    ``sigs`` maps each imported model identifier to its signature.
    """
    for imp in module.imports:
        if imp.name not in sigs:
            raise UnknownModel(f"no signature for imported model {imp.name!r}", *_pos(imp))
    imported = {imp.name: sigs[imp.name] for imp in module.imports}
    preds = {}
    for p in module.predicates:
        if p.name in preds or p.name in STDLIB:
            raise UnboundIdentifier(f"predicate {p.name!r} is already defined", *_pos(p))
        preds[p.name] = p
    _check_recursion(preds)

    checker = Checker(imported, preds)
    typed_preds = {}
    for p in module.predicates:
        scope = dict(p.params)
        body = checker.formula(p.body, scope)
        typed_preds[p.name] = dataclasses.replace(p, body=body)
    goals = tuple(dataclasses.replace(g, body=checker.formula(g.body, {})) for g in module.goals)
    typed = dataclasses.replace(module, predicates=tuple(typed_preds.values()), goals=goals)
    return TypedSpec(typed, imported, typed_preds)


def check_formula(f: A.Formula, spec: TypedSpec, scope=None) -> A.Formula:
    return Checker(spec.sigs, spec.predicates).formula(f, scope or {})
