"""SMT-LIB2 (QF_LRA) encoding of a falsification problem."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Tuple

from ..errors import EmptyConstraint, UnsupportedForDomain, UnsupportedModel
from ..model import Dense, flat_layers
from ..problem import FALSIFICATION, VerificationProblem
from ..problem.goal import LinearConstraint, NormalizedGoal
from .sexpr import decimal, float_decimal


def input_name(i: int) -> str:
    return f"X_{i}"


def output_name(j: int) -> str:
    return f"Y_{j}"


def neuron_name(l: int, j: int) -> str:
    return f"N_{l}_{j}"


def linear_term(terms: Iterable[Tuple[str, str]], const: str | None = None) -> str:
    """Sum of ``(coefficient literal, variable)`` pairs plus an optional constant."""
    parts = []
    for c, v in terms:
        if c == "1.0":
            parts.append(v)
        elif c == "(- 1.0)":
            parts.append(f"(- {v})")
        else:
            parts.append(f"(* {c} {v})")
    if const is not None and const != "0.0":
        parts.append(const)
    if not parts:
        return const or "0.0"
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def atom_text(a: LinearConstraint, strict_ops: bool = True) -> str:
    """Comparison text, flipped so the leading coefficient is positive."""
    coeffs = [(output_name(j), c) for j, c in a.out_coeffs] + [(input_name(i), c) for i, c in a.in_coeffs]
    op, bound = a.op, a.bound
    if coeffs and coeffs[0][1] < 0:
        coeffs = [(v, -c) for v, c in coeffs]
        bound = -bound
        op = {"<": ">", "<=": ">="}[op]
    if not strict_ops:
        op = {"<": "<=", ">": ">="}.get(op, op)
    lhs = linear_term([(decimal(c), v) for v, c in coeffs])
    return f"({op} {lhs} {decimal(bound)})"


def dnf_text(goal: NormalizedGoal, strict_ops: bool = True) -> str:
    def conj(d):
        if not d:
            return "true"
        if len(d) == 1:
            return atom_text(d[0], strict_ops)
        return "(and " + " ".join(atom_text(a, strict_ops) for a in d) + ")"
    if len(goal.disjuncts) == 1:
        return conj(goal.disjuncts[0])
    return "(or " + " ".join(conj(d) for d in goal.disjuncts) + ")"


def _implied_by_box(a: LinearConstraint, p: VerificationProblem) -> bool:
    if a.strict or a.out_coeffs or len(a.in_coeffs) != 1:
        return False
    (i, k), = a.in_coeffs
    v = a.bound / k
    box = p.input_region
    return box.hi[i] <= v if k > 0 else box.lo[i] >= v


def precondition_atoms(p: VerificationProblem) -> List[LinearConstraint]:
    return [a for a in p.constraints if not _implied_by_box(a, p)]


def model_layers(p: VerificationProblem):
    try:
        return flat_layers(p.model)
    except UnsupportedForDomain as e:
        raise UnsupportedModel(str(e)) from None


def violated_goal(p: VerificationProblem) -> NormalizedGoal:
    if p.polarity != FALSIFICATION:
        raise ValueError("emit the negated problem (falsification polarity)")
    bad = p.output_constraint.linearize(p.model.output_dim)
    if bad.is_false:
        raise EmptyConstraint(f"goal {p.name or '?'}: the negated property is unsatisfiable")
    for a in bad.atoms():
        if any(not 0 <= j < p.model.output_dim for j, _ in a.out_coeffs):
            raise EmptyConstraint("atom refers to an output outside the model")
    return bad


def emit_smtlib(p: VerificationProblem) -> str:
    """Script whose satisfying models are counterexamples to the original goal."""
    bad = violated_goal(p)
    layers = model_layers(p)
    n_in = p.model.input_dim
    lines = [f"; goal {p.name or '-'}: falsification form", "(set-option :produce-models true)",
             "(set-logic QF_LRA)"]
    names: List[List[str]] = [[input_name(i) for i in range(n_in)]]
    for l, layer in enumerate(layers):
        width = layer.out_dim if isinstance(layer, Dense) else len(names[-1])
        last = l == len(layers) - 1
        names.append([output_name(j) if last else neuron_name(l, j) for j in range(width)])
    for group in names:
        lines.extend(f"(declare-const {v} Real)" for v in group)
    box = p.input_region
    for i in range(n_in):
        lines.append(f"(assert (>= {input_name(i)} {decimal(box.lo[i])}))")
        lines.append(f"(assert (<= {input_name(i)} {decimal(box.hi[i])}))")
    for a in precondition_atoms(p):
        lines.append(f"(assert {atom_text(a)})")
    for l, layer in enumerate(layers):
        src, dst = names[l], names[l + 1]
        if isinstance(layer, Dense):
            for j, v in enumerate(dst):
                terms = [(float_decimal(w), src[i]) for i, w in enumerate(layer.weights[j]) if w != 0.0]
                lines.append(f"(assert (= {v} {linear_term(terms, float_decimal(layer.bias[j]))}))")
        else:
            for u, v in zip(src, dst):
                lines.append(f"(assert (= {v} (ite (>= {u} 0.0) {u} 0.0)))")
    lines.append(f"(assert {dnf_text(bad)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
