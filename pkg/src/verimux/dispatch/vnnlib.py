"""VNN-LIB property files and a checker for the subset we emit."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from ..errors import UnparseableOutput, UnsupportedAtom
from ..problem import Box, VerificationProblem
from ..problem.goal import LinearConstraint, NormalizedGoal, _sparse
from .sexpr import decimal, dump, parse_all, to_fraction
from .smtlib import dnf_text, input_name, output_name, precondition_atoms, violated_goal

_VAR = re.compile(r"^(X|Y)_(0|[1-9][0-9]*)$")


def emit_vnnlib(p: VerificationProblem) -> str:
    """Property file over ``X_i``/``Y_j``; strict comparisons become non-strict."""
    bad = violated_goal(p)
    n_in, n_out = p.model.input_dim, p.model.output_dim
    for a in bad.atoms():
        if any(not 0 <= j < n_out for j, _ in a.out_coeffs) or any(
                not 0 <= i < n_in for i, _ in a.in_coeffs):
            raise UnsupportedAtom(f"atom {a} refers to a variable that is not an input or output")
    lines = [f"; goal {p.name or '-'}: falsification form"]
    lines.extend(f"(declare-const {input_name(i)} Real)" for i in range(n_in))
    lines.extend(f"(declare-const {output_name(j)} Real)" for j in range(n_out))
    box = p.input_region
    for i in range(n_in):
        lines.append(f"(assert (>= {input_name(i)} {decimal(box.lo[i])}))")
        lines.append(f"(assert (<= {input_name(i)} {decimal(box.hi[i])}))")
    for a in precondition_atoms(p):
        lines.append(f"(assert {dnf_text(NormalizedGoal.of([[a]]), strict_ops=False)})")
    if len(bad.disjuncts) == 1 and bad.disjuncts[0]:
        for a in bad.disjuncts[0]:
            lines.append(f"(assert {dnf_text(NormalizedGoal.of([[a]]), strict_ops=False)})")
    else:
        lines.append(f"(assert {dnf_text(bad, strict_ops=False)})")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class VnnProperty:
    """A checked property: declared dimensions, input box, and constraints in DNF.

    Each top-level assertion is a DNF (list of conjunctions of atoms); the
    property holds when every assertion does.
    """
    num_inputs: int
    num_outputs: int
    assertions: Tuple[NormalizedGoal, ...]

    def input_box(self) -> Box:
        lo: Dict[int, Fraction] = {}
        hi: Dict[int, Fraction] = {}
        for g in self.assertions:
            if len(g.disjuncts) != 1 or len(g.disjuncts[0]) != 1:
                continue
            a = g.disjuncts[0][0]
            if a.out_coeffs or len(a.in_coeffs) != 1:
                continue
            (i, k), = a.in_coeffs
            v = a.bound / k
            if k > 0:
                hi[i] = min(hi.get(i, v), v)
            else:
                lo[i] = max(lo.get(i, v), v)
        missing = [i for i in range(self.num_inputs) if i not in lo or i not in hi]
        if missing:
            raise UnparseableOutput(f"inputs {missing} are not bounded")
        return Box(tuple(lo[i] for i in range(self.num_inputs)),
                   tuple(hi[i] for i in range(self.num_inputs)))

    def holds(self, x, y) -> bool:
        return all(g.holds(y, x) for g in self.assertions)


def _linear(e, coeffs: Dict[Tuple[str, int], Fraction], scale: Fraction):
    """Accumulate ``scale * e`` into coeffs; returns the constant part."""
    if isinstance(e, str):
        m = _VAR.match(e)
        if m:
            key = (m.group(1), int(m.group(2)))
            coeffs[key] = coeffs.get(key, Fraction(0)) + scale
            return Fraction(0)
        return scale * to_fraction(e)
    if not e:
        raise UnparseableOutput("empty term")
    head = e[0]
    if head == "+":
        return sum((_linear(t, coeffs, scale) for t in e[1:]), Fraction(0))
    if head == "-":
        if len(e) == 2:
            return _linear(e[1], coeffs, -scale)
        c = _linear(e[1], coeffs, scale)
        for t in e[2:]:
            c += _linear(t, coeffs, -scale)
        return c
    if head == "*":
        consts, vars_ = [], []
        for t in e[1:]:
            try:
                consts.append(to_fraction(t))
            except UnparseableOutput:
                vars_.append(t)
        if len(vars_) > 1:
            raise UnparseableOutput(f"nonlinear term {dump(e)}")
        k = scale
        for c in consts:
            k *= c
        return _linear(vars_[0], coeffs, k) if vars_ else k
    if head == "/":
        return scale * to_fraction(e)
    raise UnparseableOutput(f"unsupported term {dump(e)}")


def _atom(e, dims) -> List[LinearConstraint]:
    op = e[0]
    if len(e) != 3:
        raise UnparseableOutput(f"comparison needs two operands: {dump(e)}")
    coeffs: Dict[Tuple[str, int], Fraction] = {}
    const = _linear(e[1], coeffs, Fraction(1)) + _linear(e[2], coeffs, Fraction(-1))
    for (kind, i) in coeffs:
        if i >= dims[kind]:
            raise UnparseableOutput(f"{kind}_{i} is not declared")
    out = _sparse({i: c for (k, i), c in coeffs.items() if k == "Y"})
    inp = _sparse({i: c for (k, i), c in coeffs.items() if k == "X"})
    neg = lambda cs: tuple((i, -c) for i, c in cs)
    # lhs - rhs = sum + const
    if op in ("<=", "<"):
        return [LinearConstraint(out, inp, op, -const)]
    if op in (">=", ">"):
        return [LinearConstraint(neg(out), neg(inp), "<=" if op == ">=" else "<", const)]
    if op == "=":
        return [LinearConstraint(out, inp, "<=", -const), LinearConstraint(neg(out), neg(inp), "<=", const)]
    raise UnparseableOutput(f"unknown comparison {op!r}")


def _formula(e, dims) -> NormalizedGoal:
    if isinstance(e, str):
        if e == "true":
            return NormalizedGoal.true()
        if e == "false":
            return NormalizedGoal.false()
        raise UnparseableOutput(f"unexpected symbol {e!r} in assertion")
    head = e[0] if e else None
    if head == "and":
        acc = NormalizedGoal.true()
        for sub in e[1:]:
            g = _formula(sub, dims)
            acc = NormalizedGoal.of([a + b for a in acc.disjuncts for b in g.disjuncts])
        return acc
    if head == "or":
        return NormalizedGoal.of([d for sub in e[1:] for d in _formula(sub, dims).disjuncts])
    if head in ("<=", ">=", "<", ">", "="):
        return NormalizedGoal.of([_atom(e, dims)])
    raise UnparseableOutput(f"unsupported formula {dump(e) if isinstance(e, list) else e}")


def check_vnnlib(text: str, strict: bool = True) -> VnnProperty:
    """Parse a VNN-LIB property, rejecting anything outside the supported grammar.

    With ``strict`` the file must use only non-strict comparisons and declare
    inputs and outputs densely from 0.
    """
    dims = {"X": 0, "Y": 0}
    declared = set()
    assertions = []
    for cmd in parse_all(text):
        if not isinstance(cmd, list) or not cmd:
            raise UnparseableOutput(f"unexpected top-level item {cmd!r}")
        if cmd[0] == "declare-const":
            if len(cmd) != 3 or cmd[2] != "Real" or not isinstance(cmd[1], str):
                raise UnparseableOutput(f"bad declaration {dump(cmd)}")
            m = _VAR.match(cmd[1])
            if not m:
                raise UnparseableOutput(f"variable name {cmd[1]!r} is not X_i or Y_j")
            if cmd[1] in declared:
                raise UnparseableOutput(f"{cmd[1]} declared twice")
            if assertions:
                raise UnparseableOutput("declarations must precede assertions")
            declared.add(cmd[1])
            kind, i = m.group(1), int(m.group(2))
            dims[kind] = max(dims[kind], i + 1)
        elif cmd[0] == "assert":
            if len(cmd) != 2:
                raise UnparseableOutput("assert takes one formula")
            if strict and any(t in ("<", ">") for t in _symbols(cmd[1])):
                raise UnparseableOutput("strict comparisons are outside the property grammar")
            assertions.append(_formula(cmd[1], dims))
        else:
            raise UnparseableOutput(f"unsupported command {cmd[0]!r}")
    if strict:
        for kind in ("X", "Y"):
            want = {f"{kind}_{i}" for i in range(dims[kind])}
            if not want <= declared:
                raise UnparseableOutput(f"{kind} variables are not declared densely")
    return VnnProperty(dims["X"], dims["Y"], tuple(assertions))


def _symbols(e):
    if isinstance(e, str):
        yield e
    else:
        for x in e:
            yield from _symbols(x)
