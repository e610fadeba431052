"""Predicate inlining and bounded-quantifier unrolling."""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Mapping

from ..errors import ExpansionDepthExceeded, UnboundedQuantifier
from . import ast as A
from .typecheck import TypedSpec, check_formula

MAX_DEPTH = 64
MAX_UNROLL = 4096


class _Names:
    """Deterministic fresh-name supply avoiding every name already in use."""

    def __init__(self, used):
        self.used = set(used)

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        k = 1
        while f"{base}_{k}" in self.used:
            k += 1
        name = f"{base}_{k}"
        self.used.add(name)
        return name


def _all_names(node) -> set:
    out = set()
    for n in A.walk(node):
        if isinstance(n, A.Var):
            out.add(n.name)
        elif isinstance(n, (A.Forall, A.Exists)):
            out.add(n.var)
    return out


def substitute(node, mapping: Mapping[str, A.Term]):
    """Replace free variables; caller guarantees binders do not capture."""
    if not mapping:
        return node
    if isinstance(node, A.Var):
        return mapping.get(node.name, node)
    if isinstance(node, (A.Forall, A.Exists)):
        inner = {k: v for k, v in mapping.items() if k != node.var}
        return dataclasses.replace(node, body=substitute(node.body, inner))
    if isinstance(node, A.PredApply):
        return dataclasses.replace(node, args=tuple(substitute(a, mapping) for a in node.args))
    changes = {}
    for f in dataclasses.fields(node):
        if f.name in ("span", "sort"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, A.Node):
            changes[f.name] = substitute(v, mapping)
    return _fold(dataclasses.replace(node, **changes)) if changes else node


def _fold(node):
    """Fold integer arithmetic so that unrolled indices become literals."""
    if isinstance(node, (A.Add, A.Sub, A.Mul)) and isinstance(node.left, A.IntLit) \
            and isinstance(node.right, A.IntLit):
        a, b = node.left.value, node.right.value
        v = a + b if isinstance(node, A.Add) else a - b if isinstance(node, A.Sub) else a * b
        return A.IntLit(v, span=node.span, sort=A.INT)
    if isinstance(node, A.Neg) and isinstance(node.arg, A.IntLit):
        return A.IntLit(-node.arg.value, span=node.span, sort=A.INT)
    return node


def _rename_binders(node, names: _Names, env=None):
    """Alpha-rename every binder in ``node`` to a fresh name."""
    env = env or {}
    if isinstance(node, A.Var):
        return env.get(node.name, node)
    if isinstance(node, (A.Forall, A.Exists)):
        new = names.fresh(node.var)
        inner = dict(env)
        inner[node.var] = A.Var(new, span=node.span, sort=node.var_sort)
        return dataclasses.replace(node, var=new, body=_rename_binders(node.body, names, inner))
    if isinstance(node, A.PredApply):
        return dataclasses.replace(node, args=tuple(_rename_binders(a, names, env) for a in node.args))
    changes = {}
    for f in dataclasses.fields(node):
        if f.name in ("span", "sort"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, A.Node):
            changes[f.name] = _rename_binders(v, names, env)
    return dataclasses.replace(node, **changes) if changes else node


def _dist_linf(a: A.Term, b: A.Term, eps: A.Term, n: int, span) -> A.Formula:
    parts = []
    for i in range(n):
        idx = A.IntLit(i, span=span, sort=A.INT)
        diff = A.Sub(A.Index(a, idx, span=span, sort=A.REAL),
                     A.Index(b, idx, span=span, sort=A.REAL), span=span, sort=A.REAL)
        parts.append(A.Compare("<", A.Neg(eps, span=span, sort=eps.sort), diff, span=span))
        parts.append(A.Compare("<", diff, eps, span=span))
    return A.conj(parts, span=span)


class Expander:
    def __init__(self, spec: TypedSpec, names: _Names):
        self.spec = spec
        self.names = names

    def run(self, f: A.Formula, depth: int = 0) -> A.Formula:
        if depth > MAX_DEPTH:
            line, col = (f.span.line, f.span.col) if f.span else (0, 0)
            raise ExpansionDepthExceeded(f"predicate expansion deeper than {MAX_DEPTH}", line, col)
        if isinstance(f, A.PredApply):
            return self.run(self.inline(f), depth + 1)
        if isinstance(f, (A.Forall, A.Exists)):
            body = self.run(f.body, depth)
            if f.var_sort in (A.INT, A.LABEL):
                return self.unroll(dataclasses.replace(f, body=body))
            return dataclasses.replace(f, body=body)
        if isinstance(f, (A.And, A.Or, A.Implies)):
            return dataclasses.replace(f, left=self.run(f.left, depth), right=self.run(f.right, depth))
        if isinstance(f, A.Not):
            return dataclasses.replace(f, arg=self.run(f.arg, depth))
        return f

    def inline(self, f: A.PredApply) -> A.Formula:
        sp = f.span
        if f.name in self.spec.predicates:
            p = self.spec.predicates[f.name]
            body = _rename_binders(p.body, self.names)
            return substitute(body, {name: arg for (name, _), arg in zip(p.params, f.args)})
        if f.name == "dist_linf":
            a, b, eps = f.args[:3]
            return _dist_linf(a, b, eps, a.sort.dim, sp)
        if f.name == "robust_to":
            m, a, eps = f.args
            sig = self.spec.sigs[m.name]
            vsort = A.vector(sig.num_input)
            bname = self.names.fresh("b")
            b = A.Var(bname, span=sp, sort=vsort)
            out_sort = A.vector(sig.num_classes)
            same = A.Compare(
                "=",
                A.ArgMax(A.ModelApply(m.name, a, span=sp, sort=out_sort), span=sp, sort=A.LABEL),
                A.ArgMax(A.ModelApply(m.name, b, span=sp, sort=out_sort), span=sp, sort=A.LABEL),
                span=sp)
            body = A.Implies(A.PredApply("dist_linf", (a, b, eps), span=sp), same, span=sp)
            return A.Forall(bname, vsort, body, span=sp)
        raise AssertionError(f"unresolved predicate {f.name}")

    def unroll(self, q) -> A.Formula:
        """Turn ``forall i: int. lo <= i < hi -> body`` into a finite conjunction."""
        line, col = (q.span.line, q.span.col) if q.span else (0, 0)
        is_forall = isinstance(q, A.Forall)
        body = q.body
        if is_forall and isinstance(body, A.Implies):
            guard, rest = body.left, body.right
        elif not is_forall and isinstance(body, A.And):
            guard, rest = body.left, body.right
        else:
            raise UnboundedQuantifier(f"quantifier over {q.var_sort} needs a bounding guard", line, col)
        lo, hi = None, None
        for atom in _conjuncts(guard):
            bound = _int_bound(atom, q.var)
            if bound is None:
                raise UnboundedQuantifier(
                    f"guard of quantifier over {q.var!r} must be integer bounds on it", line, col)
            kind, value = bound
            if kind == "lo":
                lo = value if lo is None else max(lo, value)
            else:
                hi = value if hi is None else min(hi, value)
        if lo is None or hi is None:
            raise UnboundedQuantifier(f"quantifier over {q.var!r} is not bounded on both sides", line, col)
        if hi - lo > MAX_UNROLL:
            raise UnboundedQuantifier(f"quantifier range of {hi - lo} values is too large", line, col)
        parts = [substitute(rest, {q.var: A.IntLit(k, span=q.span, sort=A.INT)}) for k in range(lo, hi)]
        return A.conj(parts, q.span) if is_forall else A.disj(parts, q.span)


def _conjuncts(f):
    if isinstance(f, A.And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _int_bound(atom, var):
    """Return ('lo', k) meaning var >= k, or ('hi', k) meaning var < k."""
    if not isinstance(atom, A.Compare):
        return None
    op, left, right = atom.op, atom.left, atom.right
    if isinstance(right, A.Var) and right.name == var and isinstance(left, A.IntLit):
        op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}[op]
        left, right = right, left
    if not (isinstance(left, A.Var) and left.name == var and isinstance(right, A.IntLit)):
        return None
    k = right.value
    return {
        "<": ("hi", k), "<=": ("hi", k + 1), ">": ("lo", k + 1), ">=": ("lo", k),
    }.get(op)


def _dedupe_binders(f, names: _Names, bound=frozenset(), env=None):
    """Rename binders that shadow an enclosing binder on the same path."""
    env = env or {}
    if isinstance(f, A.Var):
        return env.get(f.name, f)
    if isinstance(f, (A.Forall, A.Exists)):
        inner = dict(env)
        var = f.var
        if var in bound:
            var = names.fresh(var)
            inner[f.var] = A.Var(var, span=f.span, sort=f.var_sort)
        else:
            inner.pop(f.var, None)
        return dataclasses.replace(f, var=var, body=_dedupe_binders(f.body, names, bound | {var}, inner))
    if isinstance(f, A.PredApply):
        return dataclasses.replace(f, args=tuple(_dedupe_binders(a, names, bound, env) for a in f.args))
    changes = {}
    for fld in dataclasses.fields(f):
        if fld.name in ("span", "sort"):
            continue
        v = getattr(f, fld.name)
        if isinstance(v, A.Node):
            changes[fld.name] = _dedupe_binders(v, names, bound, env)
    return dataclasses.replace(f, **changes) if changes else f


def expand_goal(goal: A.Formula, env: TypedSpec) -> A.Formula:
    """Inline every predicate application of a typechecked goal.

    The result has no ``PredApply`` nodes, no integer quantifiers, and no
    variable bound twice along any root-to-leaf path.
    """
    names = _Names(_all_names(goal) | set(env.sigs))
    out = Expander(env, names).run(goal)
    out = _dedupe_binders(out, names)
    # re-annotate nodes built during expansion
    return check_formula(out, env)


def decimal_value(t: A.Term) -> Fraction:
    if isinstance(t, A.RealLit):
        return Fraction(t.text)
    if isinstance(t, A.IntLit):
        return Fraction(t.value)
    raise TypeError(t)
