"""Minimal S-expression reader/writer for SMT-LIB style text."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Union

from ..errors import UnparseableOutput

SExpr = Union[str, List["SExpr"]]

_TOKEN = re.compile(r"""\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+))""")


def tokens(text: str):
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                return
            raise UnparseableOutput(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        if m.group(1) is not None:
            continue
        tok = next(g for g in m.groups()[1:] if g is not None)
        yield tok


def parse_all(text: str) -> list:
    """Every top-level expression in ``text``."""
    stack: list = [[]]
    for tok in tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise UnparseableOutput("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise UnparseableOutput("unbalanced '('")
    return stack[0]


def dump(e: SExpr) -> str:
    if isinstance(e, list):
        return "(" + " ".join(dump(x) for x in e) + ")"
    return e


_NUM = re.compile(r"^[0-9]+(\.[0-9]+)?$")


def to_fraction(e: SExpr) -> Fraction:
    """Value of an SMT-LIB real constant term: numerals, decimals, ``-`` and ``/``."""
    if isinstance(e, str):
        if _NUM.match(e):
            return Fraction(e)
        if re.match(r"^-?[0-9]+(\.[0-9]+)?([eE][-+]?[0-9]+)?$", e):
            return Fraction(e)
        raise UnparseableOutput(f"not a numeric literal: {e!r}")
    if len(e) == 2 and e[0] == "-":
        return -to_fraction(e[1])
    if len(e) == 3 and e[0] == "/":
        d = to_fraction(e[2])
        if d == 0:
            raise UnparseableOutput("division by zero in model value")
        return to_fraction(e[1]) / d
    if len(e) >= 2 and e[0] == "+":
        return sum((to_fraction(x) for x in e[1:]), Fraction(0))
    if len(e) >= 3 and e[0] == "*":
        out = Fraction(1)
        for x in e[1:]:
            out *= to_fraction(x)
        return out
    raise UnparseableOutput(f"not a constant term: {dump(e)}")


def decimal(v) -> str:
    """Exact SMT-LIB literal for a rational: plain decimal when it terminates."""
    f = Fraction(v)
    neg = f < 0
    f = abs(f)
    d = f.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        body = f"(/ {f.numerator}.0 {f.denominator}.0)"
    else:
        k = max(twos, fives)
        scaled = f.numerator * (10 ** k) // f.denominator
        s = str(scaled).rjust(k + 1, "0")
        body = f"{s[:-k]}.{s[-k:]}" if k else f"{s}.0"
        if k:
            body = body.rstrip("0")
            if body.endswith("."):
                body += "0"
    return f"(- {body})" if neg else body


def float_decimal(v: float) -> str:
    """Shortest round-trip decimal of a float as an SMT-LIB literal."""
    return decimal(Fraction(repr(float(v))))
