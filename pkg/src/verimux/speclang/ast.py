"""AST for the ``.mls`` property language.

Nodes are frozen dataclasses. Source spans and sort annotations are excluded
from equality so that structurally identical trees compare equal regardless
of where they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Sort:
    kind: str  # real | int | vector | label | model | bool
    dim: Optional[int] = None

    def __str__(self):
        return f"vector {self.dim}" if self.kind == "vector" else self.kind

    @property
    def numeric(self) -> bool:
        return self.kind in ("real", "int")


REAL = Sort("real")
INT = Sort("int")
LABEL = Sort("label")
MODEL = Sort("model")


def vector(n: int) -> Sort:
    return Sort("vector", n)


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Term(Node):
    sort: Optional[Sort] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class RealLit(Term):
    text: str  # exact decimal text as written


@dataclass(frozen=True)
class IntLit(Term):
    value: int


@dataclass(frozen=True)
class VecLit(Term):
    """Constant vector; only produced by instantiation, never parsed."""
    items: Tuple[str, ...]


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class ModelApply(Term):
    model: str
    arg: Term


@dataclass(frozen=True)
class Index(Term):
    vec: Term
    index: Term


@dataclass(frozen=True)
class ArgMax(Term):
    arg: Term


# -- formulas ----------------------------------------------------------------

@dataclass(frozen=True)
class Formula(Node):
    pass


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    var_sort: Sort
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    var_sort: Sort
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Compare(Formula):
    op: str  # one of < <= = >= >
    left: Term
    right: Term


@dataclass(frozen=True)
class PredApply(Formula):
    name: str
    args: Tuple[Term, ...]


Quantifier = Union[Forall, Exists]


# -- module level -------------------------------------------------------------

@dataclass(frozen=True)
class Import(Node):
    name: str
    path: str


@dataclass(frozen=True)
class PredicateDef(Node):
    name: str
    params: Tuple[Tuple[str, Sort], ...]
    body: Formula


@dataclass(frozen=True)
class Goal(Node):
    name: str
    body: Formula


@dataclass(frozen=True)
class SpecModule(Node):
    imports: Tuple[Import, ...] = ()
    predicates: Tuple[PredicateDef, ...] = ()
    goals: Tuple[Goal, ...] = ()

    def goal(self, name: str) -> Goal:
        for g in self.goals:
            if g.name == name:
                return g
        raise KeyError(name)


def conj(parts, span=None) -> Formula:
    """Right-nested conjunction; ``true`` when empty."""
    parts = list(parts)
    if not parts:
        return BoolLit(True, span=span)
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out, span=span)
    return out


def disj(parts, span=None) -> Formula:
    parts = list(parts)
    if not parts:
        return BoolLit(False, span=span)
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out, span=span)
    return out


def children(node):
    """Immediate sub-nodes of a term or formula, in source order."""
    if isinstance(node, (Add, Sub, Mul, And, Or, Implies, Compare)):
        return (node.left, node.right)
    if isinstance(node, (Neg, ArgMax, Not)):
        return (node.arg,)
    if isinstance(node, ModelApply):
        return (node.arg,)
    if isinstance(node, Index):
        return (node.vec, node.index)
    if isinstance(node, (Forall, Exists)):
        return (node.body,)
    if isinstance(node, PredApply):
        return node.args
    return ()


def walk(node):
    yield node
    for c in children(node):
        yield from walk(c)


def free_vars(node, bound=frozenset()) -> set:
    if isinstance(node, Var):
        return set() if node.name in bound else {node.name}
    if isinstance(node, (Forall, Exists)):
        return free_vars(node.body, bound | {node.var})
    out = set()
    for c in children(node):
        out |= free_vars(c, bound)
    return out
