"""Reader and writer for the NNet plain-text network format.

Layout after the ``//`` comment header::

    numLayers,inputSize,outputSize,maxLayerSize
    size_0,size_1,...,size_numLayers
    0                      (unused flag)
    input mins
    input maxes
    means   (inputSize + 1 entries, output last)
    ranges  (inputSize + 1 entries, output last)
    per layer: one weight row per output neuron, then one bias per line
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import FormatError, NonFiniteWeight, ShapeMismatch
from .core import Dense, NetworkGraph, Normalization, ReLU


def _cells(line: str, lineno: int) -> list[float]:
    out = []
    for cell in line.split(","):
        cell = cell.strip()
        if not cell:
            continue
        try:
            v = float(cell)
        except ValueError:
            raise FormatError(lineno, f"not a number: {cell!r}") from None
        out.append(v)
    return out


def parse_nnet(source: str, apply_normalization: bool = False) -> NetworkGraph:
    """Parse NNet text into a :class:`NetworkGraph`.

    Normalization constants are always stored on the graph; they are only
    folded into the layers when ``apply_normalization`` is set.
    """
    lines = [(k + 1, ln) for k, ln in enumerate(source.splitlines())
             if ln.strip() and not ln.lstrip().startswith("//")]
    it = iter(lines)

    def next_line(what):
        try:
            return next(it)
        except StopIteration:
            raise ShapeMismatch(f"file ends before {what}") from None

    lineno, text = next_line("the header")
    header = _cells(text, lineno)
    if len(header) < 3:
        raise FormatError(lineno, "header needs numLayers,inputSize,outputSize,maxLayerSize")
    num_layers, in_size, out_size = (int(v) for v in header[:3])
    if num_layers < 1:
        raise FormatError(lineno, "numLayers must be positive")

    lineno, text = next_line("the layer sizes")
    sizes = [int(v) for v in _cells(text, lineno)]
    if len(sizes) != num_layers + 1:
        raise ShapeMismatch(f"header claims {num_layers} layers but line {lineno} "
                            f"lists {len(sizes)} sizes")
    if sizes[0] != in_size or sizes[-1] != out_size:
        raise ShapeMismatch("layer sizes disagree with header input/output sizes")

    next_line("the flag line")
    norm_rows = []
    for what, n in (("mins", in_size), ("maxes", in_size), ("means", in_size + 1),
                    ("ranges", in_size + 1)):
        lineno, text = next_line(f"input {what}")
        vals = _cells(text, lineno)
        if len(vals) != n:
            raise ShapeMismatch(f"line {lineno}: expected {n} {what}, found {len(vals)}")
        norm_rows.append(np.array(vals))
    norm = Normalization(*norm_rows)

    layers = []
    for k in range(num_layers):
        fan_in, fan_out = sizes[k], sizes[k + 1]
        rows = []
        for _ in range(fan_out):
            lineno, text = next_line(f"weights of layer {k}")
            row = _cells(text, lineno)
            if len(row) != fan_in:
                raise ShapeMismatch(f"line {lineno}: layer {k} weight row has {len(row)} "
                                    f"entries, expected {fan_in}")
            rows.append(row)
        bias = []
        for _ in range(fan_out):
            lineno, text = next_line(f"biases of layer {k}")
            b = _cells(text, lineno)
            if len(b) != 1:
                raise ShapeMismatch(f"line {lineno}: expected one bias, found {len(b)}")
            bias.append(b[0])
        if not all(math.isfinite(v) for r in rows for v in r) or not all(map(math.isfinite, bias)):
            raise NonFiniteWeight(f"layer {k} contains non-finite values")
        layers.append(Dense(np.array(rows), np.array(bias)))
        if k < num_layers - 1:
            layers.append(ReLU())

    leftover = next(it, None)
    if leftover is not None:
        raise ShapeMismatch(f"line {leftover[0]}: unexpected data after the last layer")

    if apply_normalization:
        layers = _with_normalization(layers, norm, in_size)
    return NetworkGraph(tuple(layers), normalization=norm)


def _with_normalization(layers, norm: Normalization, in_size: int):
    # input clipping to [mins, maxes] is not affine and is left out
    scale = 1.0 / norm.ranges[:in_size]
    pre = Dense(np.diag(scale), -norm.means[:in_size] * scale)
    out_dim = layers[-1].out_dim
    post = Dense(np.eye(out_dim) * norm.ranges[-1], np.full(out_dim, norm.means[-1]))
    return [pre] + list(layers) + [post]


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values) + ","


def write_nnet(net: NetworkGraph) -> str:
    """Serialize a Dense/ReLU alternating network; exact inverse of :func:`parse_nnet`."""
    dense = [l for l in net.layers if isinstance(l, Dense)]
    expected = []
    for k, d in enumerate(dense):
        expected.append(d)
        if k < len(dense) - 1:
            expected.append(ReLU())
    if tuple(expected) != net.layers:
        raise ValueError("NNet can only express dense layers separated by single ReLUs")
    sizes = [dense[0].in_dim] + [d.out_dim for d in dense]
    in_size = sizes[0]
    norm = net.normalization or Normalization(
        np.full(in_size, -1e308), np.full(in_size, 1e308),
        np.zeros(in_size + 1), np.ones(in_size + 1))
    out = ["// Neural network file written by verimux",
           f"{len(dense)},{in_size},{sizes[-1]},{max(sizes)},",
           ",".join(str(s) for s in sizes) + ",",
           "0,",
           _row(norm.mins), _row(norm.maxes), _row(norm.means), _row(norm.ranges)]
    for d in dense:
        out.extend(_row(r) for r in d.weights)
        out.extend(repr(float(b)) + "," for b in d.bias)
    return "\n".join(out) + "\n"
