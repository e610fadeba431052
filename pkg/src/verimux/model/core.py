"""Concrete model IR: dense ReLU networks, SVMs, and sequential pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import (
    DimensionMismatch,
    NonFiniteInput,
    NonFiniteWeight,
    SchemaError,
    UnknownKernel,
)


def _frozen_array(a, ndim, what) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{what} must have {ndim} dimension(s), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteWeight(f"{what} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dense:
    weights: np.ndarray  # out x in
    bias: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.weights, 2, "dense weights")
        b = _frozen_array(self.bias, 1, "dense bias")
        if w.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"dense layer has {w.shape[0]} rows but {b.shape[0]} biases")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def __call__(self, x):
        return self.weights @ x + self.bias

    def __eq__(self, other):
        return (isinstance(other, Dense) and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))

    def __hash__(self):
        return hash((self.weights.tobytes(), self.bias.tobytes()))


@dataclass(frozen=True)
class ReLU:
    def __call__(self, x):
        return np.maximum(x, 0.0)


Layer = Union[Dense, ReLU]


@dataclass(frozen=True, eq=False)
class Normalization:
    """NNet input/output normalization constants (means/ranges carry the output entry last)."""
    mins: np.ndarray
    maxes: np.ndarray
    means: np.ndarray
    ranges: np.ndarray

    def __eq__(self, other):
        return isinstance(other, Normalization) and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("mins", "maxes", "means", "ranges"))

    def __hash__(self):
        return hash(self.means.tobytes())


@dataclass(frozen=True)
class NetworkGraph:
    layers: Tuple[Layer, ...]
    normalization: Optional[Normalization] = field(default=None, compare=True)

    kind = "network"

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        dense = [l for l in layers if isinstance(l, Dense)]
        if not dense:
            raise SchemaError("layers", "a network needs at least one dense layer")
        dim = None
        for k, layer in enumerate(layers):
            if isinstance(layer, Dense):
                if dim is not None and layer.in_dim != dim:
                    raise DimensionMismatch(
                        f"layer {k} expects {layer.in_dim} inputs but previous layer gives {dim}")
                dim = layer.out_dim
            elif not isinstance(layer, ReLU):
                raise TypeError(f"unsupported layer {layer!r}")
        if isinstance(layers[0], ReLU):
            raise SchemaError("layers[0]", "a network must start with a dense layer")

    @property
    def input_dim(self) -> int:
        return next(l for l in self.layers if isinstance(l, Dense)).in_dim

    @property
    def output_dim(self) -> int:
        return [l for l in self.layers if isinstance(l, Dense)][-1].out_dim

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer(x)
        return x

    def affine_layers(self):
        return self.layers


@dataclass(frozen=True, eq=False)
class DecisionFunction:
    support_vectors: np.ndarray  # k x d
    dual_coef: np.ndarray  # k
    intercept: float

    def __post_init__(self):
        sv = _frozen_array(self.support_vectors, 2, "support vectors")
        dc = _frozen_array(self.dual_coef, 1, "dual coefficients")
        if sv.shape[0] == 0:
            raise SchemaError("support_vectors", "a decision function needs at least one support vector")
        if sv.shape[0] != dc.shape[0]:
            raise SchemaError("dual_coef", f"{dc.shape[0]} coefficients for {sv.shape[0]} support vectors")
        if not np.isfinite(self.intercept):
            raise NonFiniteWeight("intercept is not finite")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coef", dc)
        object.__setattr__(self, "intercept", float(self.intercept))

    def __eq__(self, other):
        return (isinstance(other, DecisionFunction)
                and np.array_equal(self.support_vectors, other.support_vectors)
                and np.array_equal(self.dual_coef, other.dual_coef)
                and self.intercept == other.intercept)

    def __hash__(self):
        return hash((self.support_vectors.tobytes(), self.intercept))


@dataclass(frozen=True)
class SvmModel:
    """One-vs-all SVM; one decision function (score) per class."""
    kernel: str  # linear | rbf
    functions: Tuple[DecisionFunction, ...]
    classes: Tuple[int, ...] = ()
    gamma: Optional[float] = None

    kind = "svm"

    def __post_init__(self):
        if self.kernel not in ("linear", "rbf"):
            raise UnknownKernel("kernel", f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and not (self.gamma is not None and self.gamma > 0):
            raise SchemaError("gamma", "rbf kernel needs gamma > 0")
        funcs = tuple(self.functions)
        if not funcs:
            raise SchemaError("functions", "an SVM needs at least one decision function")
        dims = {f.support_vectors.shape[1] for f in funcs}
        if len(dims) != 1:
            raise DimensionMismatch(f"support vectors of differing dimensions {sorted(dims)}")
        object.__setattr__(self, "functions", funcs)
        classes = tuple(self.classes) or tuple(range(len(funcs)))
        if len(classes) != len(funcs):
            raise SchemaError("classes", f"{len(classes)} classes for {len(funcs)} decision functions")
        object.__setattr__(self, "classes", classes)

    @property
    def input_dim(self) -> int:
        return self.functions[0].support_vectors.shape[1]

    @property
    def output_dim(self) -> int:
        return len(self.functions)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.functions))
        for c, f in enumerate(self.functions):
            if self.kernel == "linear":
                k = f.support_vectors @ x
            else:
                d = f.support_vectors - x
                k = np.exp(-self.gamma * np.einsum("ij,ij->i", d, d))
            out[c] = f.dual_coef @ k + f.intercept
        return out

    def as_dense(self) -> Dense:
        """Primal form of a linear SVM: score = (sum_i a_i s_i) . x + b."""
        if self.kernel != "linear":
            raise ValueError("only linear SVMs have an affine score function")
        w = np.stack([f.dual_coef @ f.support_vectors for f in self.functions])
        b = np.array([f.intercept for f in self.functions])
        return Dense(w, b)


@dataclass(frozen=True)
class Pipeline:
    stages: Tuple["Model", ...]

    kind = "pipeline"

    def __post_init__(self):
        flat = []
        for s in self.stages:
            flat.extend(s.stages if isinstance(s, Pipeline) else [s])
        if not flat:
            raise SchemaError("stages", "a pipeline needs at least one stage")
        for k in range(1, len(flat)):
            if flat[k - 1].output_dim != flat[k].input_dim:
                raise DimensionMismatch(
                    f"stage {k} expects {flat[k].input_dim} inputs but stage {k - 1} "
                    f"produces {flat[k - 1].output_dim}", stage=k)
        object.__setattr__(self, "stages", tuple(flat))

    @property
    def input_dim(self) -> int:
        return self.stages[0].input_dim

    @property
    def output_dim(self) -> int:
        return self.stages[-1].output_dim

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        for s in self.stages:
            x = s.evaluate(x)
        return x


Model = Union[NetworkGraph, SvmModel, Pipeline]


def eval_model(m: Model, x) -> np.ndarray:
    """Score vector of ``m`` at ``x`` (before any argmax)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != m.input_dim:
        raise DimensionMismatch(f"model expects {m.input_dim} inputs, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("input contains non-finite values")
    return m.evaluate(x)


def eval_batch(m: Model, xs) -> np.ndarray:
    """Row-wise :func:`eval_model` over an ``(n, input_dim)`` array."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != m.input_dim:
        raise DimensionMismatch(f"model expects {m.input_dim} inputs, got shape {xs.shape}")
    return _batch(m, xs)


def _batch(m, xs):
    if isinstance(m, NetworkGraph):
        for layer in m.layers:
            xs = xs @ layer.weights.T + layer.bias if isinstance(layer, Dense) else np.maximum(xs, 0.0)
        return xs
    if isinstance(m, Pipeline):
        for s in m.stages:
            xs = _batch(s, xs)
        return xs
    return np.stack([m.evaluate(x) for x in xs]) if len(xs) else np.zeros((0, m.output_dim))


def decision(m: Model, x) -> int:
    """Class decision: argmax of the scores, lowest index on ties."""
    return int(np.argmax(eval_model(m, x)))


def compose_sequential(stages: Sequence[Model]) -> Pipeline:
    return Pipeline(tuple(stages))


def is_rbf(m: Model) -> bool:
    if isinstance(m, SvmModel):
        return m.kernel == "rbf"
    if isinstance(m, Pipeline):
        return any(is_rbf(s) for s in m.stages)
    return False


def flat_layers(m: Model) -> Tuple[Layer, ...]:
    """Lower a piecewise-linear model to a flat list of Dense/ReLU layers.

    Linear SVM stages become a single dense layer; RBF kernels raise
    :class:`~verimux.errors.UnsupportedForDomain`.
    """
    from ..errors import UnsupportedForDomain

    if isinstance(m, NetworkGraph):
        return m.layers
    if isinstance(m, SvmModel):
        if m.kernel != "linear":
            raise UnsupportedForDomain("RBF-kernel SVMs are not supported by this domain")
        return (m.as_dense(),)
    if isinstance(m, Pipeline):
        out = ()
        for s in m.stages:
            out += flat_layers(s)
        return out
    raise TypeError(f"not a model: {m!r}")


def signature(m: Model):
    from ..speclang.typecheck import ModelSignature
    return ModelSignature(m.input_dim, m.output_dim, m.kind)
