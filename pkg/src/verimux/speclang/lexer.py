from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SpecSyntaxError, UnterminatedString

KEYWORDS = {
    "model", "from", "predicate", "goal", "forall", "exists", "not",
    "argmax", "real", "int", "vector", "label", "true", "false",
}

# longest first
PUNCT = ["->", "/\\", "\\/", "<=", ">=", "(", ")", "[", "]", ",", ":", ";",
         ".", "=", "<", ">", "+", "-", "*"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, DECIMAL, STRING, EOF, or the keyword/punct text
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return repr(self.text)


def tokenize(source: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(k):
        nonlocal i, line, col
        for ch in source[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("(*", i):
            start = (line, col)
            depth = 0
            while i < n:
                if source.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif source.startswith("*)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            if depth:
                raise SpecSyntaxError("unterminated comment", *start)
            continue
        if ch == '"':
            start = (line, col)
            j = i + 1
            while j < n and source[j] != '"' and source[j] != "\n":
                j += 1
            if j >= n or source[j] != '"':
                raise UnterminatedString("unterminated string literal", *start)
            tokens.append(Token("STRING", source[i + 1:j], *start))
            advance(j + 1 - i)
            continue
        m = _NUMBER.match(source, i)
        if m:
            kind = "DECIMAL" if m.group(1) else "INT"
            tokens.append(Token(kind, m.group(0), line, col))
            advance(len(m.group(0)))
            continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group(0)
            tokens.append(Token(word if word in KEYWORDS else "IDENT", word, line, col))
            advance(len(word))
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                tokens.append(Token(p, p, line, col))
                advance(len(p))
                break
        else:
            raise SpecSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens
