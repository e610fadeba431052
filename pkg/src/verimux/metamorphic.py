"""Metamorphic testing: input transformations, the decision relation they
induce, and per-class agreement tables over a dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, SchemaError
from .model import Dataset, Dense, NetworkGraph, ReLU, eval_batch

PERMUTATION = "permutation"
SIGN_FLIP = "sign_flip"
NOISE = "noise"
KINDS = (PERMUTATION, SIGN_FLIP, NOISE)


def _check_perm(p, what):
    p = tuple(int(v) for v in p)
    if sorted(p) != list(range(len(p))):
        raise SchemaError(what, f"{list(p)} is not a permutation of 0..{len(p) - 1}")
    return p


@dataclass(frozen=True)
class Transformation:
    """An input transformation with the label relation it should induce.

    ``sigma_out`` of ``None`` means the decision is expected to stay the same.
    """
    kind: str
    sigma_in: Tuple[int, ...] = ()
    dims: Tuple[int, ...] = ()
    eps: float = 0.0
    seed: int = 0
    sigma_out: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError("kind", f"unknown transformation {self.kind!r}")
        if self.kind == PERMUTATION:
            object.__setattr__(self, "sigma_in", _check_perm(self.sigma_in, "sigma_in"))
        object.__setattr__(self, "dims", tuple(sorted(set(int(d) for d in self.dims))))
        if self.sigma_out is not None:
            object.__setattr__(self, "sigma_out", _check_perm(self.sigma_out, "sigma_out"))
        if not (self.eps >= 0 and np.isfinite(self.eps)):
            raise SchemaError("eps", "noise amplitude must be a finite non-negative number")

    @classmethod
    def permutation(cls, sigma_in, sigma_out=None):
        return cls(PERMUTATION, sigma_in=tuple(sigma_in),
                   sigma_out=None if sigma_out is None else tuple(sigma_out))

    @classmethod
    def sign_flip(cls, dims, sigma_out=None):
        return cls(SIGN_FLIP, dims=tuple(dims),
                   sigma_out=None if sigma_out is None else tuple(sigma_out))

    @classmethod
    def noise(cls, eps, seed=0):
        return cls(NOISE, eps=float(eps), seed=int(seed))

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == PERMUTATION:
            d["sigma_in"] = list(self.sigma_in)
        elif self.kind == SIGN_FLIP:
            d["dims"] = list(self.dims)
        else:
            d["eps"] = self.eps
            d["seed"] = self.seed
        if self.sigma_out is not None:
            d["sigma_out"] = list(self.sigma_out)
        return d


def transformation_from_dict(d: Mapping) -> Transformation:
    if not isinstance(d, Mapping) or "kind" not in d:
        raise SchemaError("kind", "transformation object needs a 'kind'")
    kind = d["kind"]
    sigma_out = d.get("sigma_out")
    sigma_out = None if sigma_out is None else tuple(sigma_out)
    if kind == PERMUTATION:
        if "sigma_in" not in d:
            raise SchemaError("sigma_in", "permutation needs sigma_in")
        return Transformation.permutation(d["sigma_in"], sigma_out)
    if kind == SIGN_FLIP:
        if "dims" not in d:
            raise SchemaError("dims", "sign_flip needs dims")
        return Transformation.sign_flip(d["dims"], sigma_out)
    if kind == NOISE:
        if sigma_out is not None:
            raise SchemaError("sigma_out", "noise expects the decision to be unchanged")
        return Transformation.noise(d.get("eps", 0.0), d.get("seed", 0))
    raise SchemaError("kind", f"unknown transformation {kind!r}")


def load_transformation(path) -> Transformation:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg} at line {e.lineno}") from None
    return transformation_from_dict(data)


def _noise(t: Transformation, n: int, row: int) -> np.ndarray:
    rng = np.random.default_rng((t.seed, row))
    return rng.uniform(-t.eps, t.eps, size=n)


def apply_transform(t: Transformation, x, row: int = 0) -> np.ndarray:
    """Transformed copy of ``x``; ``row`` keys the noise stream so results
    do not depend on evaluation order."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if t.kind == PERMUTATION:
        if len(t.sigma_in) != n:
            raise IndexOutOfRange(f"permutation of {len(t.sigma_in)} indices on a vector of {n}")
        return x[..., list(t.sigma_in)]
    if t.kind == SIGN_FLIP:
        bad = [d for d in t.dims if not 0 <= d < n]
        if bad:
            raise IndexOutOfRange(f"sign-flip dims {bad} outside 0..{n - 1}")
        out = x.copy()
        out[..., list(t.dims)] *= -1.0
        return out
    if t.eps == 0:
        return x.copy()
    return x + _noise(t, n, row)


@dataclass(frozen=True)
class DecisionRelation:
    """``decision(f(t(x))) = mapping[decision(f(x))]``."""
    mapping: Optional[Tuple[int, ...]]

    @property
    def is_equality(self) -> bool:
        return self.mapping is None or all(i == c for i, c in enumerate(self.mapping))

    def expected(self, base: int) -> int:
        if self.mapping is None:
            return base
        if not 0 <= base < len(self.mapping):
            raise IndexOutOfRange(f"class {base} outside the output permutation")
        return self.mapping[base]

    def pairs(self):
        """Label pairs swapped by the relation."""
        if self.mapping is None:
            return []
        return [(c, s) for c, s in enumerate(self.mapping) if c < s and self.mapping[s] == c]

    def __str__(self):
        if self.is_equality:
            return "decision(f(t(x))) = decision(f(x))"
        return "decision(f(t(x))) = sigma(decision(f(x))), sigma = " + str(list(self.mapping))


def derive_property(t: Transformation) -> DecisionRelation:
    return DecisionRelation(t.sigma_out)


@dataclass(frozen=True)
class ClassRow:
    label: int
    name: str
    count: int
    agree: int

    @property
    def percentage(self) -> Optional[float]:
        return None if self.count == 0 else 100.0 * self.agree / self.count


@dataclass(frozen=True)
class AgreementTable:
    rows: Tuple[ClassRow, ...]
    transformation: Transformation
    relation: DecisionRelation
    disagreements: Tuple[int, ...] = field(default=())

    @property
    def total(self) -> int:
        return sum(r.count for r in self.rows)

    @property
    def agree(self) -> int:
        return sum(r.agree for r in self.rows)

    @property
    def percentage(self) -> Optional[float]:
        return None if self.total == 0 else 100.0 * self.agree / self.total

    def to_dict(self) -> dict:
        return {
            "transformation": self.transformation.to_dict(),
            "relation": str(self.relation),
            "classes": [{"label": r.label, "name": r.name, "count": r.count, "agree": r.agree,
                         "percentage": r.percentage} for r in self.rows],
            "overall": {"count": self.total, "agree": self.agree, "percentage": self.percentage},
            "disagreements": list(self.disagreements),
        }


def agreement_table(m, d: Dataset, t: Transformation,
                    class_names: Optional[Sequence[str]] = None) -> AgreementTable:
    """Counts, per base class, of rows whose transformed decision matches the relation."""
    if d.feature_dim != m.input_dim:
        raise DimensionMismatch(
            f"dataset rows have {d.feature_dim} features, model takes {m.input_dim}")
    k = m.output_dim
    rel = derive_property(t)
    if rel.mapping is not None and len(rel.mapping) != k:
        raise DimensionMismatch(f"output permutation has {len(rel.mapping)} entries, model has {k} classes")
    if class_names is not None and len(class_names) != k:
        raise DimensionMismatch(f"{len(class_names)} class names for {k} classes")
    X = d.features
    TX = np.stack([apply_transform(t, x, row=i) for i, x in enumerate(X)])
    base = np.argmax(eval_batch(m, X), axis=1)
    moved = np.argmax(eval_batch(m, TX), axis=1)
    expected = base if rel.mapping is None else np.asarray(rel.mapping)[base]
    ok = moved == expected
    rows = []
    for c in range(k):
        sel = base == c
        name = class_names[c] if class_names is not None else str(c)
        rows.append(ClassRow(c, name, int(sel.sum()), int((ok & sel).sum())))
    return AgreementTable(tuple(rows), t, rel, tuple(int(i) for i in np.flatnonzero(~ok)))


def input_matrix(t: Transformation, n: int) -> np.ndarray:
    """Signed permutation matrix P with ``apply_transform(t, x) = P x``."""
    if t.kind == PERMUTATION:
        if len(t.sigma_in) != n:
            raise IndexOutOfRange(f"permutation of {len(t.sigma_in)} indices on a vector of {n}")
        return np.eye(n)[list(t.sigma_in)]
    if t.kind == SIGN_FLIP:
        if any(not 0 <= d < n for d in t.dims):
            raise IndexOutOfRange(f"sign-flip dims outside 0..{n - 1}")
        p = np.eye(n)
        p[list(t.dims), list(t.dims)] = -1.0
        return p
    raise ValueError("noise is not linear")


def make_equivariant_network(hidden: Dense, out: Dense, t: Transformation) -> NetworkGraph:
    """One-hidden-layer net with ``f(P x) = Q f(x)`` for an involutive ``P``.

    Built from an arbitrary hidden/output pair by doubling the hidden layer
    with the transformed copy and pairing it with the permuted output rows.
    """
    n, k = hidden.in_dim, out.out_dim
    p = input_matrix(t, n)
    if not np.allclose(p @ p, np.eye(n)):
        raise ValueError("the input transformation must be an involution")
    sigma = t.sigma_out or tuple(range(k))
    if len(sigma) != k or any(sigma[s] != c for c, s in enumerate(sigma)):
        raise ValueError("the output permutation must be an involution over the classes")
    q = np.zeros((k, k))
    q[list(sigma), list(range(k))] = 1.0
    w1 = np.vstack([hidden.weights, hidden.weights @ p])
    b1 = np.concatenate([hidden.bias, hidden.bias])
    w2 = np.hstack([out.weights, q @ out.weights])
    b2 = out.bias + q @ out.bias
    return NetworkGraph((Dense(w1, b1), ReLU(), Dense(w2, b2)))
