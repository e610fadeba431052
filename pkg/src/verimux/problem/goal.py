"""Output constraints in disjunctive normal form over linear and class atoms.

Coefficients and bounds are exact rationals (``Fraction``) so that literals
written in a spec reach the SMT-LIB emitter without rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Tuple, Union

import numpy as np

from ..errors import NonLinearAtom, UnsupportedFormulaShape
from ..speclang import ast as A

Coeffs = Tuple[Tuple[int, Fraction], ...]


def _sparse(d: Dict[int, Fraction]) -> Coeffs:
    return tuple(sorted((k, Fraction(v)) for k, v in d.items() if v != 0))


def _dot(coeffs: Coeffs, v) -> float:
    return float(sum(float(c) * v[i] for i, c in coeffs)) if coeffs else 0.0


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(out_coeffs . y) + sum(in_coeffs . x)  op  bound`` with op in {<, <=}."""
    out_coeffs: Coeffs
    in_coeffs: Coeffs
    op: str
    bound: Fraction

    def __post_init__(self):
        if self.op not in ("<", "<="):
            raise ValueError(f"bad operator {self.op!r}")

    @property
    def strict(self) -> bool:
        return self.op == "<"

    def negate(self) -> "LinearConstraint":
        neg = lambda cs: tuple((k, -c) for k, c in cs)
        return LinearConstraint(neg(self.out_coeffs), neg(self.in_coeffs),
                                "<=" if self.strict else "<", -self.bound)

    def lhs(self, y, x) -> float:
        return _dot(self.out_coeffs, y) + _dot(self.in_coeffs, x)

    def slack(self, y, x) -> float:
        return float(self.bound) - self.lhs(y, x)

    def holds(self, y, x, margin: float = 0.0) -> bool:
        s = self.slack(y, x)
        if margin > 0:
            return s > margin
        return s > 0 if self.strict else s >= 0

    def out_vector(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        for k, c in self.out_coeffs:
            v[k] = float(c)
        return v

    def in_vector(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        for k, c in self.in_coeffs:
            v[k] = float(c)
        return v

    def key(self):
        return (0, self.out_coeffs, self.in_coeffs, self.op, self.bound)

    def __str__(self):
        def side(cs, name):
            return [f"{'' if c == 1 else '-' if c == -1 else str(c) + '*'}{name}[{k}]" for k, c in cs]
        terms = side(self.out_coeffs, "y") + side(self.in_coeffs, "x")
        lhs = " + ".join(terms).replace("+ -", "- ") or "0"
        return f"{lhs} {self.op} {self.bound}"


@dataclass(frozen=True)
class ClassIs:
    label: int

    def negate(self):
        return ClassIsNot(self.label)

    def holds(self, y, x, margin: float = 0.0) -> bool:
        y = np.asarray(y)
        others = np.delete(y, self.label) if 0 <= self.label < len(y) else None
        if others is None:
            return False
        gap = y[self.label] - others
        return bool(np.all(gap > margin)) if len(others) else True

    def key(self):
        return (1, self.label)

    def __str__(self):
        return f"class = {self.label}"


@dataclass(frozen=True)
class ClassIsNot:
    label: int

    def negate(self):
        return ClassIs(self.label)

    def holds(self, y, x, margin: float = 0.0) -> bool:
        y = np.asarray(y)
        if not 0 <= self.label < len(y):
            return True
        gap = np.delete(y, self.label) - y[self.label]
        if margin > 0:
            return bool(np.any(gap > margin))
        return bool(np.any(gap >= 0))

    def key(self):
        return (2, self.label)

    def __str__(self):
        return f"class != {self.label}"


Atom = Union[LinearConstraint, ClassIs, ClassIsNot]


def _canon_conj(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    uniq = {a.key(): a for a in atoms}
    return tuple(uniq[k] for k in sorted(uniq))


def _canon(disjuncts) -> Tuple[Tuple[Atom, ...], ...]:
    conj = {}
    for d in disjuncts:
        c = _canon_conj(d)
        conj[tuple(a.key() for a in c)] = c
    keys = sorted(conj, key=lambda k: (len(k), k))
    kept = []
    for k in keys:
        ks = set(k)
        if any(set(other) <= ks for other in kept):
            continue  # absorbed by a smaller conjunct
        kept.append(k)
    return tuple(conj[k] for k in sorted(kept))


@dataclass(frozen=True)
class NormalizedGoal:
    """Disjunction of conjunctions of atoms, kept in a canonical order.

    ``()`` is false; ``((),)`` is true.
    """
    disjuncts: Tuple[Tuple[Atom, ...], ...]

    @classmethod
    def of(cls, disjuncts) -> "NormalizedGoal":
        return cls(_canon(disjuncts))

    @classmethod
    def true(cls):
        return cls(((),))

    @classmethod
    def false(cls):
        return cls(())

    @property
    def is_true(self) -> bool:
        return any(len(d) == 0 for d in self.disjuncts)

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    def canonical(self) -> "NormalizedGoal":
        return NormalizedGoal.of(self.disjuncts)

    def atoms(self):
        return [a for d in self.disjuncts for a in d]

    def negate(self) -> "NormalizedGoal":
        # not(OR_i AND_j a_ij) = AND_i OR_j not(a_ij), redistributed to DNF
        acc = [()]
        for d in self.disjuncts:
            clause = [a.negate() for a in d]
            acc = [tuple(c) + (a,) for c in acc for a in clause]
            acc = list(_canon(acc))
        return NormalizedGoal.of(acc)

    def holds(self, y, x, margin: float = 0.0) -> bool:
        return any(all(a.holds(y, x, margin) for a in d) for d in self.disjuncts)

    def linearize(self, num_outputs: int) -> "NormalizedGoal":
        """Replace class atoms by strict pairwise score differences."""
        if not any(isinstance(a, (ClassIs, ClassIsNot)) for a in self.atoms()):
            return self
        out = []
        for d in self.disjuncts:
            options = [_linear_class(a, num_outputs) if isinstance(a, (ClassIs, ClassIsNot))
                       else [[a]] for a in d]
            for combo in product(*options):
                out.append([a for part in combo for a in part])
        return NormalizedGoal.of(out)

    def mentions_inputs(self) -> bool:
        return any(isinstance(a, LinearConstraint) and a.in_coeffs for a in self.atoms())

    def __str__(self):
        if self.is_false:
            return "false"
        return " \\/ ".join("(" + (" /\\ ".join(map(str, d)) or "true") + ")" for d in self.disjuncts)


def class_atoms(label: int, num_outputs: int):
    """``argmax(y) = label`` as strict atoms ``y[j] - y[label] < 0`` for j != label."""
    out = []
    for j in range(num_outputs):
        if j != label:
            out.append(LinearConstraint(_sparse({j: Fraction(1), label: Fraction(-1)}), (), "<",
                                        Fraction(0)))
    return out


def _linear_class(atom, n):
    """DNF (list of conjunct lists) for a class atom over n outputs."""
    if not 0 <= atom.label < n:
        return [] if isinstance(atom, ClassIs) else [[]]
    conj = class_atoms(atom.label, n)
    if isinstance(atom, ClassIs):
        return [conj]
    return [[a.negate()] for a in conj]


# -- formula -> DNF -------------------------------------------------------------

@dataclass
class LinExpr:
    out: Dict[int, Fraction]
    inp: Dict[int, Fraction]
    const: Fraction

    @property
    def is_const(self):
        return not any(self.out.values()) and not any(self.inp.values())

    def scale(self, k: Fraction) -> "LinExpr":
        return LinExpr({i: c * k for i, c in self.out.items()},
                       {i: c * k for i, c in self.inp.items()}, self.const * k)

    def __add__(self, o: "LinExpr") -> "LinExpr":
        out = dict(self.out)
        for i, c in o.out.items():
            out[i] = out.get(i, 0) + c
        inp = dict(self.inp)
        for i, c in o.inp.items():
            inp[i] = inp.get(i, 0) + c
        return LinExpr(out, inp, self.const + o.const)

    def __neg__(self):
        return self.scale(Fraction(-1))

    def __sub__(self, o):
        return self + (-o)


def const(v) -> LinExpr:
    return LinExpr({}, {}, Fraction(v))


class _Normalizer:
    def __init__(self, output_var, input_var, num_outputs, keep_class_atoms):
        self.y = output_var
        self.x = input_var
        self.n = num_outputs
        self.keep = keep_class_atoms

    def linear(self, t: A.Term) -> LinExpr:
        if isinstance(t, A.RealLit):
            return const(Fraction(t.text))
        if isinstance(t, A.IntLit):
            return const(t.value)
        if isinstance(t, A.Index):
            if not isinstance(t.index, A.IntLit):
                raise UnsupportedFormulaShape("vector index must be a constant after expansion")
            k = t.index.value
            v = t.vec
            if isinstance(v, A.Var) and v.name == self.y:
                return LinExpr({k: Fraction(1)}, {}, Fraction(0))
            if isinstance(v, A.Var) and v.name == self.x:
                return LinExpr({}, {k: Fraction(1)}, Fraction(0))
            if isinstance(v, A.VecLit):
                return const(Fraction(v.items[k]))
            raise UnsupportedFormulaShape(f"cannot index {v!r}")
        if isinstance(t, A.Add):
            return self.linear(t.left) + self.linear(t.right)
        if isinstance(t, A.Sub):
            return self.linear(t.left) - self.linear(t.right)
        if isinstance(t, A.Neg):
            return -self.linear(t.arg)
        if isinstance(t, A.Mul):
            a, b = self.linear(t.left), self.linear(t.right)
            if a.is_const:
                return b.scale(a.const)
            if b.is_const:
                return a.scale(b.const)
            raise NonLinearAtom("product of two non-constant terms")
        if isinstance(t, A.Var) and t.name == self.x and t.sort == A.REAL:
            return LinExpr({}, {0: Fraction(1)}, Fraction(0))
        raise UnsupportedFormulaShape(f"term is not linear over outputs and inputs: {t!r}")

    def label(self, t: A.Term):
        """('const', k) or ('out', None) for argmax of the output vector."""
        if isinstance(t, A.IntLit):
            return ("const", t.value)
        if isinstance(t, A.ArgMax):
            if isinstance(t.arg, A.Var) and t.arg.name == self.y:
                return ("out", None)
            if isinstance(t.arg, A.VecLit):
                return ("const", int(np.argmax([float(Fraction(v)) for v in t.arg.items])))
        raise UnsupportedFormulaShape(f"unsupported label term {t!r}")

    def class_dnf(self, label: int, positive: bool):
        atom = ClassIs(label) if positive else ClassIsNot(label)
        if self.keep or self.n is None:
            return [[atom]]
        return _linear_class(atom, self.n)

    def compare(self, f: A.Compare, positive: bool):
        is_label = A.LABEL in (f.left.sort, f.right.sort) or isinstance(f.left, A.ArgMax) \
            or isinstance(f.right, A.ArgMax)
        if is_label:
            if f.op != "=":
                raise UnsupportedFormulaShape("labels only support equality")
            l, r = self.label(f.left), self.label(f.right)
            if l[0] == r[0] == "const":
                return [[]] if (l[1] == r[1]) == positive else []
            if l[0] == r[0] == "out":
                return [[]] if positive else []
            k = l[1] if l[0] == "const" else r[1]
            return self.class_dnf(k, positive)
        e = self.linear(f.left) - self.linear(f.right)
        op = f.op
        if not positive:
            op = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!="}[op]
        if op == "<":
            return [[self.atom(e, "<")]]
        if op == "<=":
            return [[self.atom(e, "<=")]]
        if op == ">":
            return [[self.atom(-e, "<")]]
        if op == ">=":
            return [[self.atom(-e, "<=")]]
        if op == "=":
            return [[self.atom(e, "<="), self.atom(-e, "<=")]]
        return [[self.atom(e, "<")], [self.atom(-e, "<")]]

    def atom(self, e: LinExpr, op: str):
        """``e op 0`` as an atom, or the literal truth value when ``e`` is constant."""
        if e.is_const:
            ok = e.const < 0 if op == "<" else e.const <= 0
            return True if ok else False
        return LinearConstraint(_sparse(e.out), _sparse(e.inp), op, -e.const)

    def dnf(self, f: A.Formula, positive: bool = True):
        if isinstance(f, A.BoolLit):
            return [[]] if f.value == positive else []
        if isinstance(f, A.Not):
            return self.dnf(f.arg, not positive)
        if isinstance(f, A.Implies):
            f = A.Or(A.Not(f.left), f.right)
        if isinstance(f, (A.And, A.Or)):
            left, right = self.dnf(f.left, positive), self.dnf(f.right, positive)
            if isinstance(f, A.And) == positive:
                return [a + b for a in left for b in right]
            return left + right
        if isinstance(f, A.Compare):
            out = []
            for conj in self.compare(f, positive):
                if False in conj:
                    continue
                out.append([a for a in conj if a is not True])
            return out
        if isinstance(f, (A.Forall, A.Exists)):
            raise UnsupportedFormulaShape("output constraint must be quantifier-free")
        raise UnsupportedFormulaShape(f"unsupported formula {f!r}")


def normalize_goal(q: A.Formula, num_outputs: int | None = None, output_var: str = "y",
                   input_var: str = "x", keep_class_atoms: bool = False) -> NormalizedGoal:
    """Compile a quantifier-free formula over outputs/inputs into a :class:`NormalizedGoal`.

    ``output_var`` names the model's score vector and ``input_var`` the input
    vector. ``argmax(y) = c`` becomes strict pairwise differences
    ``y[j] - y[c] < 0`` unless ``keep_class_atoms`` is set (or the number of
    outputs is unknown).
    """
    norm = _Normalizer(output_var, input_var, num_outputs, keep_class_atoms)
    return NormalizedGoal.of(norm.dnf(q))


def normalize_linear(f: A.Formula, input_var: str) -> NormalizedGoal:
    """Normal form of an input-only constraint (no outputs allowed)."""
    return normalize_goal(f, None, output_var="\0no-output", input_var=input_var)
