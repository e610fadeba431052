"""Verdicts returned by every engine, and their provenance."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

VALID = "Valid"
FALSIFIED = "Falsified"
UNKNOWN = "Unknown"
TIMEOUT = "Timeout"
ERROR = "Error"

TAGS = (VALID, FALSIFIED, UNKNOWN, TIMEOUT, ERROR)


@dataclass(frozen=True)
class Verdict:
    tag: str
    witness: Optional[Tuple[float, ...]] = None
    message: str = ""
    engine: str = ""
    elapsed: float = field(default=0.0, compare=False)
    subproblems: int = 0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown verdict tag {self.tag!r}")
        if self.tag == FALSIFIED and self.witness is None:
            raise ValueError("a Falsified verdict needs a witness")
        if self.witness is not None:
            object.__setattr__(self, "witness", tuple(float(v) for v in self.witness))

    @classmethod
    def valid(cls, **kw):
        return cls(VALID, **kw)

    @classmethod
    def falsified(cls, witness, **kw):
        return cls(FALSIFIED, witness=tuple(witness), **kw)

    @classmethod
    def unknown(cls, message="", **kw):
        return cls(UNKNOWN, message=message, **kw)

    @classmethod
    def timeout(cls, message="", **kw):
        return cls(TIMEOUT, message=message, **kw)

    @classmethod
    def error(cls, message, **kw):
        return cls(ERROR, message=message, **kw)

    def with_provenance(self, engine=None, elapsed=None, subproblems=None) -> "Verdict":
        kw = {}
        if engine is not None:
            kw["engine"] = engine
        if elapsed is not None:
            kw["elapsed"] = elapsed
        if subproblems is not None:
            kw["subproblems"] = subproblems
        return replace(self, **kw)

    def to_dict(self, timing: bool = True) -> dict:
        d = {"tag": self.tag, "engine": self.engine, "subproblems": self.subproblems}
        if self.witness is not None:
            d["witness"] = list(self.witness)
        if self.message:
            d["message"] = self.message
        if timing:
            d["elapsed"] = round(self.elapsed, 6)
        return d

    @classmethod
    def from_dict(cls, d) -> "Verdict":
        w = d.get("witness")
        return cls(d["tag"], tuple(w) if w is not None else None, d.get("message", ""),
                   d.get("engine", ""), d.get("elapsed", 0.0), d.get("subproblems", 0))
