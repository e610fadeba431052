"""Recursive-descent parser for ``.mls`` property files."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DuplicateGoalName, SpecSyntaxError
from . import ast as A
from .lexer import Token, tokenize

CMP_OPS = ("<", "<=", "=", ">=", ">")
# tokens that continue a term; a parenthesised formula must not be followed by them
_TERM_CONT = set(CMP_OPS) | {"+", "-", "*", "["}


@dataclass(frozen=True)
class _Call(A.Term):
    """``IDENT(args)`` before we know whether it is a predicate or a model application."""
    name: str
    args: tuple


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.furthest: SpecSyntaxError | None = None

    # -- token helpers ---------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def span(self, tok: Token | None = None) -> A.Span:
        tok = tok or self.tok
        return A.Span(tok.line, tok.col)

    def error(self, message, expected=()):
        t = self.tok
        return SpecSyntaxError(f"{message}, found {t.describe()}", t.line, t.col, expected)

    def accept(self, kind) -> Token | None:
        if self.tok.kind == kind:
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, kind, what=None) -> Token:
        t = self.accept(kind)
        if t is None:
            raise self.error(f"expected {what or repr(kind)}", [kind])
        return t

    # -- module ----------------------------------------------------------------
    def parse_module(self) -> A.SpecModule:
        imports, preds, goals = [], [], []
        seen = {}
        while self.tok.kind != "EOF":
            if self.tok.kind == "model":
                imports.append(self.parse_import())
            elif self.tok.kind == "predicate":
                preds.append(self.parse_predicate())
            elif self.tok.kind == "goal":
                g = self.parse_goal()
                if g.name in seen:
                    raise DuplicateGoalName(
                        f"duplicate goal name {g.name!r} (first defined at {seen[g.name]})",
                        g.span.line, g.span.col)
                seen[g.name] = g.span
                goals.append(g)
            else:
                raise self.error("expected a declaration", ["model", "predicate", "goal"])
        return A.SpecModule(tuple(imports), tuple(preds), tuple(goals), span=A.Span(1, 1))

    def parse_import(self) -> A.Import:
        sp = self.span()
        self.expect("model")
        name = self.expect("IDENT", "model identifier").text
        self.expect("from")
        path = self.expect("STRING", "file path string").text
        self.accept(";")
        return A.Import(name, path, span=sp)

    def parse_predicate(self) -> A.PredicateDef:
        sp = self.span()
        self.expect("predicate")
        name = self.expect("IDENT", "predicate name").text
        self.expect("(")
        params = []
        if self.tok.kind != ")":
            while True:
                pname = self.expect("IDENT", "parameter name").text
                self.expect(":")
                params.append((pname, self.parse_sort()))
                if not self.accept(","):
                    break
        self.expect(")")
        self.expect("=")
        body = self.parse_formula()
        self.accept(";")
        return A.PredicateDef(name, tuple(params), body, span=sp)

    def parse_goal(self) -> A.Goal:
        sp = self.span()
        self.expect("goal")
        name = self.expect("IDENT", "goal name").text
        self.expect(":")
        body = self.parse_formula()
        self.accept(";")
        return A.Goal(name, body, span=sp)

    def parse_sort(self) -> A.Sort:
        t = self.tok
        for kw, sort in (("real", A.REAL), ("int", A.INT), ("label", A.LABEL)):
            if self.accept(kw):
                return sort
        if self.accept("vector"):
            n = self.expect("INT", "vector dimension")
            return A.vector(int(n.text))
        raise SpecSyntaxError(f"expected a sort, found {t.describe()}", t.line, t.col,
                              ["real", "int", "vector", "label"])

    # -- formulas --------------------------------------------------------------
    def parse_formula(self) -> A.Formula:
        sp = self.span()
        left = self.parse_disj()
        if self.accept("->"):
            return A.Implies(left, self.parse_formula(), span=sp)
        return left

    def parse_disj(self) -> A.Formula:
        sp = self.span()
        out = self.parse_conj()
        while self.accept("\\/"):
            out = A.Or(out, self.parse_conj(), span=sp)
        return out

    def parse_conj(self) -> A.Formula:
        sp = self.span()
        out = self.parse_unary()
        while self.accept("/\\"):
            out = A.And(out, self.parse_unary(), span=sp)
        return out

    def parse_unary(self) -> A.Formula:
        sp = self.span()
        if self.accept("not"):
            return A.Not(self.parse_unary(), span=sp)
        if self.tok.kind in ("forall", "exists"):
            q = self.tok.kind
            self.pos += 1
            var = self.expect("IDENT", "bound variable").text
            self.expect(":")
            sort = self.parse_sort()
            self.expect(".")
            body = self.parse_formula()
            cls = A.Forall if q == "forall" else A.Exists
            return cls(var, sort, body, span=sp)
        return self.parse_atom()

    def parse_atom(self) -> A.Formula:
        sp = self.span()
        if self.accept("true"):
            return A.BoolLit(True, span=sp)
        if self.accept("false"):
            return A.BoolLit(False, span=sp)
        if self.tok.kind == "(":
            saved = self.pos
            try:
                self.pos += 1
                inner = self.parse_formula()
                self.expect(")")
                if self.tok.kind not in _TERM_CONT:
                    return inner
            except SpecSyntaxError as exc:
                self._remember(exc)
            self.pos = saved
        try:
            return self.parse_comparison()
        except SpecSyntaxError as exc:
            self._remember(exc)
            raise self.furthest from None

    def _remember(self, exc: SpecSyntaxError):
        f = self.furthest
        if f is None or (exc.line, exc.col) >= (f.line, f.col):
            self.furthest = exc

    def parse_comparison(self) -> A.Formula:
        sp = self.span()
        left = self.parse_term(allow_call=True)
        if self.tok.kind not in CMP_OPS:
            if isinstance(left, _Call):
                return A.PredApply(left.name, tuple(self._finish(a) for a in left.args), span=sp)
            raise self.error("expected a comparison operator", CMP_OPS)
        left = self._finish(left)
        parts = []
        while self.tok.kind in CMP_OPS:
            op = self.tok.kind
            self.pos += 1
            right = self.parse_term()
            parts.append(A.Compare(op, left, right, span=sp))
            left = right
        return A.conj(parts, span=sp)

    # -- terms -----------------------------------------------------------------
    def parse_term(self, allow_call=False) -> A.Term:
        sp = self.span()
        out = self.parse_mul(allow_call)
        while self.tok.kind in ("+", "-"):
            op = self.tok.kind
            self.pos += 1
            rhs = self.parse_mul()
            out = (A.Add if op == "+" else A.Sub)(self._finish(out), rhs, span=sp)
        return out

    def parse_mul(self, allow_call=False) -> A.Term:
        sp = self.span()
        out = self.parse_unary_term(allow_call)
        while self.accept("*"):
            out = A.Mul(self._finish(out), self.parse_unary_term(), span=sp)
        return out

    def parse_unary_term(self, allow_call=False) -> A.Term:
        sp = self.span()
        if self.accept("-"):
            return A.Neg(self.parse_unary_term(), span=sp)
        if self.accept("argmax"):
            return A.ArgMax(self.parse_unary_term(), span=sp)
        return self.parse_postfix(allow_call)

    def parse_postfix(self, allow_call=False) -> A.Term:
        out = self.parse_primary(allow_call)
        while self.tok.kind == "[":
            sp = self.span()
            self.pos += 1
            idx = self.parse_term()
            self.expect("]")
            out = A.Index(self._finish(out), idx, span=sp)
        return out

    def parse_primary(self, allow_call=False) -> A.Term:
        t = self.tok
        sp = self.span()
        if t.kind == "IDENT":
            self.pos += 1
            if self.accept("("):
                args = []
                if self.tok.kind != ")":
                    while True:
                        args.append(self._finish(self.parse_term()))
                        if not self.accept(","):
                            break
                self.expect(")")
                call = _Call(t.text, tuple(args), span=sp)
                return call if allow_call else self._finish(call)
            return A.Var(t.text, span=sp)
        if t.kind == "INT":
            self.pos += 1
            return A.IntLit(int(t.text), span=sp)
        if t.kind == "DECIMAL":
            self.pos += 1
            return A.RealLit(t.text, span=sp)
        if t.kind == "(":
            self.pos += 1
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise self.error("expected a term", ["IDENT", "INT", "DECIMAL", "(", "-", "argmax"])

    def _finish(self, term):
        """Resolve a pending call used in term position into a model application."""
        if isinstance(term, _Call):
            if len(term.args) != 1:
                raise SpecSyntaxError(
                    f"model application {term.name}(...) takes exactly one argument, got {len(term.args)}",
                    term.span.line, term.span.col)
            return A.ModelApply(term.name, term.args[0], span=term.span)
        return term


def parse_spec(source: str) -> A.SpecModule:
    """Parse ``.mls`` source text into a :class:`SpecModule`.

    Raises :class:`SpecSyntaxError` (with line/column and the expected token
    set), :class:`UnterminatedString` or :class:`DuplicateGoalName`.
    """
    return Parser(source).parse_module()


def parse_formula(source: str) -> A.Formula:
    p = Parser(source)
    f = p.parse_formula()
    if p.tok.kind != "EOF":
        raise p.error("unexpected trailing input", ["EOF"])
    return f


def parse_term(source: str) -> A.Term:
    p = Parser(source)
    t = p._finish(p.parse_term())
    if p.tok.kind != "EOF":
        raise p.error("unexpected trailing input", ["EOF"])
    return t
