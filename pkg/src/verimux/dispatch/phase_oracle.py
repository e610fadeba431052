"""Decide small QF_LRA scripts with ReLU ``ite`` definitions exactly as
emitted: enumerate ReLU phase patterns and test each linear case by vertex
enumeration in (x, t), where t is a common slack on the asserted inequalities."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import UnparseableOutput
from .sexpr import dump, parse_all, to_fraction

MAX_WORK = 4_000_000
FEAS_TOL = 1e-9


@dataclass
class Ineq:
    coeffs: Dict[str, float]
    const: float  # sum(coeffs . v) + const  op  0
    op: str  # "<", "<=", "="


@dataclass
class Encoding:
    declared: List[str] = field(default_factory=list)
    defs: List[Tuple[str, str, object]] = field(default_factory=list)  # (var, "lin"|"relu", payload)
    asserts: List[List[List[Ineq]]] = field(default_factory=list)  # each: DNF

    @property
    def inputs(self) -> List[str]:
        defined = {v for v, _, _ in self.defs}
        return [v for v in self.declared if v not in defined]

    def evaluate(self, x: Dict[str, float]) -> Dict[str, float]:
        env = dict(x)
        for v, kind, payload in self.defs:
            if kind == "lin":
                coeffs, const = payload
                env[v] = const + sum(c * env[u] for u, c in coeffs.items())
            else:
                u = env[payload]
                env[v] = u if u >= 0 else 0.0
        return env


@dataclass
class OracleResult:
    status: str  # sat | unsat | unknown
    assignment: Optional[Dict[str, float]] = None
    cases: int = 0
    note: str = ""


def _lin(e, declared, acc: Dict[str, Fraction], scale: Fraction) -> Fraction:
    if isinstance(e, str):
        if e in declared:
            acc[e] = acc.get(e, Fraction(0)) + scale
            return Fraction(0)
        return scale * to_fraction(e)
    head = e[0] if e else None
    if head == "+":
        return sum((_lin(t, declared, acc, scale) for t in e[1:]), Fraction(0))
    if head == "-":
        if len(e) == 2:
            return _lin(e[1], declared, acc, -scale)
        c = _lin(e[1], declared, acc, scale)
        for t in e[2:]:
            c += _lin(t, declared, acc, -scale)
        return c
    if head == "*":
        k, var = scale, None
        for t in e[1:]:
            try:
                k *= to_fraction(t)
            except UnparseableOutput:
                if var is not None:
                    raise UnparseableOutput(f"nonlinear term {dump(e)}") from None
                var = t
        return _lin(var, declared, acc, k) if var is not None else k
    if head == "/":
        return scale * to_fraction(e)
    raise UnparseableOutput(f"unsupported term {dump(e) if isinstance(e, list) else e}")


def _cmp(e, declared) -> List[Ineq]:
    op, a, b = e
    acc: Dict[str, Fraction] = {}
    const = _lin(a, declared, acc, Fraction(1)) + _lin(b, declared, acc, Fraction(-1))
    if op in (">", ">="):
        acc = {k: -v for k, v in acc.items()}
        const = -const
        op = "<" if op == ">" else "<="
    return [Ineq({k: float(v) for k, v in acc.items() if v}, float(const), op)]


def _dnf(e, declared) -> List[List[Ineq]]:
    if isinstance(e, str):
        if e == "true":
            return [[]]
        if e == "false":
            return []
        raise UnparseableOutput(f"unexpected symbol {e!r}")
    head = e[0]
    if head == "and":
        acc: List[List[Ineq]] = [[]]
        for sub in e[1:]:
            acc = [a + b for a in acc for b in _dnf(sub, declared)]
        return acc
    if head == "or":
        return [d for sub in e[1:] for d in _dnf(sub, declared)]
    if head in ("<", "<=", ">", ">=", "=") and len(e) == 3:
        return [_cmp(e, declared)]
    raise UnparseableOutput(f"unsupported assertion {dump(e)}")


def _relu_def(e, declared):
    """``(= v (ite (>= u 0.0) u 0.0))`` -> (v, u)."""
    if not (isinstance(e, list) and len(e) == 3 and e[0] == "=" and isinstance(e[1], str)):
        return None
    rhs = e[2]
    if not (isinstance(rhs, list) and len(rhs) == 4 and rhs[0] == "ite"):
        return None
    cond, then, other = rhs[1], rhs[2], rhs[3]
    if (isinstance(cond, list) and len(cond) == 3 and cond[0] == ">=" and isinstance(then, str)
            and cond[1] == then and to_fraction(cond[2]) == 0 and to_fraction(other) == 0
            and then in declared):
        return e[1], then
    raise UnparseableOutput(f"unsupported ite {dump(e)}")


def parse_script(text: str) -> Encoding:
    enc = Encoding()
    declared = set()
    defined = set()
    for cmd in parse_all(text):
        if not isinstance(cmd, list) or not cmd:
            raise UnparseableOutput(f"unexpected top-level item {cmd!r}")
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info", "check-sat", "get-model", "exit"):
            continue
        if head == "declare-const" or head == "declare-fun":
            name = cmd[1]
            sort = cmd[-1]
            if sort != "Real" or (head == "declare-fun" and cmd[2] != []):
                raise UnparseableOutput(f"only real constants are supported: {dump(cmd)}")
            declared.add(name)
            enc.declared.append(name)
            continue
        if head != "assert":
            raise UnparseableOutput(f"unsupported command {head!r}")
        body = cmd[1]
        relu = _relu_def(body, declared)
        if relu is not None:
            v, u = relu
            if v in defined:
                raise UnparseableOutput(f"{v} defined twice")
            enc.defs.append((v, "relu", u))
            defined.add(v)
            continue
        if (isinstance(body, list) and len(body) == 3 and body[0] == "=" and isinstance(body[1], str)
                and body[1] in declared and body[1] not in defined and not body[1].startswith("X_")):
            acc: Dict[str, Fraction] = {}
            const = _lin(body[2], declared, acc, Fraction(1))
            if body[1] not in acc and all(u in defined or u.startswith("X_") for u in acc):
                enc.defs.append((body[1], "lin", ({k: float(c) for k, c in acc.items() if c},
                                                  float(const))))
                defined.add(body[1])
                continue
        enc.asserts.append(_dnf(body, declared))
    return enc


def _affine(enc: Encoding, phases: Dict[str, bool], inputs: List[str]):
    """Affine form (coeffs over inputs, const) of every variable under a phase pattern."""
    n = len(inputs)
    forms = {}
    for k, v in enumerate(inputs):
        e = np.zeros(n)
        e[k] = 1.0
        forms[v] = (e, 0.0)
    for v, kind, payload in enc.defs:
        if kind == "lin":
            coeffs, const = payload
            a, c = np.zeros(n), const
            for u, w in coeffs.items():
                ua, uc = forms[u]
                a = a + w * ua
                c += w * uc
            forms[v] = (a, c)
        else:
            forms[v] = forms[payload] if phases[v] else (np.zeros(n), 0.0)
    return forms


def _intervals(enc: Encoding, inputs):
    lo = {v: -math.inf for v in inputs}
    hi = {v: math.inf for v in inputs}
    for dnf in enc.asserts:
        if len(dnf) != 1:
            continue
        for q in dnf[0]:
            if len(q.coeffs) == 1:
                (v, c), = q.coeffs.items()
                if v in lo:
                    b = -q.const / c
                    if c > 0 or q.op == "=":
                        hi[v] = min(hi[v], b)
                    if c < 0 or q.op == "=":
                        lo[v] = max(lo[v], b)
    for v, kind, payload in enc.defs:
        if kind == "lin":
            coeffs, const = payload
            l = h = const
            for u, w in coeffs.items():
                l += w * (lo[u] if w > 0 else hi[u])
                h += w * (hi[u] if w > 0 else lo[u])
            lo[v], hi[v] = l, h
        else:
            lo[v], hi[v] = max(lo[payload], 0.0), max(hi[payload], 0.0)
    return lo, hi


def _best_vertex(G: np.ndarray, h: np.ndarray):
    """Vertex of {z : G z <= h} maximizing the last coordinate, or None."""
    m, d = G.shape
    if m < d:
        return None
    combos = np.array(list(itertools.combinations(range(m), d)))
    best = None
    for chunk in np.array_split(combos, max(1, len(combos) // 20000)):
        A = G[chunk]
        b = h[chunk]
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-12
        if not ok.any():
            continue
        z = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
        scale = np.maximum(1.0, np.abs(h))
        feas = np.all(z @ G.T <= h + FEAS_TOL * scale, axis=1)
        if not feas.any():
            continue
        z = z[feas]
        k = int(np.argmax(z[:, -1]))
        if best is None or z[k, -1] > best[-1] + 1e-15:
            best = z[k]
    return best


def _rows(atoms, forms, n, soft_all: bool):
    G, h = [], []
    for q in atoms:
        a, c = np.zeros(n), q.const
        for v, w in q.coeffs.items():
            fa, fc = forms[v]
            a = a + w * fa
            c += w * fc
        if q.op == "=":
            G.append(np.append(a, 0.0)); h.append(-c)
            G.append(np.append(-a, 0.0)); h.append(c)
        else:
            soft = soft_all or q.op == "<"
            G.append(np.append(a, 1.0 if soft else 0.0))
            h.append(-c)
    return G, h


def decide(enc: Encoding, max_work: int = MAX_WORK) -> OracleResult:
    inputs = enc.inputs
    n = len(inputs)
    lo, hi = _intervals(enc, inputs)
    if any(not (math.isfinite(lo[v]) and math.isfinite(hi[v])) for v in inputs):
        return OracleResult("unknown", note="inputs are not bounded")
    if any(lo[v] > hi[v] for v in inputs):
        return OracleResult("unsat", note="empty input box")
    relus = [v for v, kind, _ in enc.defs if kind == "relu"]
    fixed = {}
    free = []
    for v, kind, u in enc.defs:
        if kind != "relu":
            continue
        if lo[u] >= 0:
            fixed[v] = True
        elif hi[u] <= 0:
            fixed[v] = False
        else:
            free.append(v)
    choices = list(itertools.product(*enc.asserts))
    m_est = 2 * n + len(relus) + sum(len(d) for dnf in enc.asserts for d in dnf[:1]) + 1
    work = (2 ** len(free)) * max(1, len(choices)) * math.comb(max(m_est, n + 1), n + 1)
    if work > max_work:
        return OracleResult("unknown", note=f"case split too large ({work} vertex candidates)")
    src = {v: u for v, kind, u in enc.defs if kind == "relu"}
    best_x, best_t, cases = None, -math.inf, 0
    boundary_x = None
    for pattern in itertools.product((True, False), repeat=len(free)):
        phases = dict(fixed)
        phases.update(zip(free, pattern))
        forms = _affine(enc, phases, inputs)
        phase_G, phase_h = [], []
        for v in free:
            a, c = forms[src[v]]
            sgn = -1.0 if phases[v] else 1.0
            phase_G.append(np.append(sgn * a, 0.0))
            phase_h.append(-sgn * c)
        for choice in choices:
            cases += 1
            atoms = [q for conj in choice for q in conj]
            G, h = _rows(atoms, forms, n, soft_all=True)
            G = np.array(G + phase_G + [np.append(np.zeros(n), 1.0)])
            h = np.array(h + phase_h + [1.0])
            z = _best_vertex(G, h)
            if z is None:
                continue
            if z[-1] > best_t:
                best_t, best_x = z[-1], z[:-1]
            if z[-1] > FEAS_TOL:
                continue
            if z[-1] >= -FEAS_TOL and boundary_x is None:
                G2, h2 = _rows(atoms, forms, n, soft_all=False)
                G2 = np.array(G2 + phase_G + [np.append(np.zeros(n), 1.0)])
                z2 = _best_vertex(G2, np.array(h2 + phase_h + [1.0]))
                if z2 is not None and z2[-1] > FEAS_TOL:
                    boundary_x = z2[:-1]
    if best_x is not None and best_t > FEAS_TOL:
        x = best_x
    elif boundary_x is not None:
        x = boundary_x
    else:
        return OracleResult("unsat", cases=cases)
    env = enc.evaluate(dict(zip(inputs, (float(v) for v in x))))
    return OracleResult("sat", {v: env[v] for v in enc.declared}, cases=cases)


def decide_script(text: str, max_work: int = MAX_WORK) -> OracleResult:
    return decide(parse_script(text), max_work)
