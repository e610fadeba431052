"""Interval (box) propagation through affine + ReLU models."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..model import Dense, flat_layers
from ..problem import Box


def dense_interval(layer: Dense, lo: np.ndarray, hi: np.ndarray):
    w = layer.weights
    wp, wn = np.maximum(w, 0.0), np.minimum(w, 0.0)
    return wp @ lo + wn @ hi + layer.bias, wp @ hi + wn @ lo + layer.bias


def layer_interval(layer, lo, hi):
    if isinstance(layer, Dense):
        return dense_interval(layer, lo, hi)
    return np.maximum(lo, 0.0), np.maximum(hi, 0.0)


def interval_bounds(layers, lo, hi):
    """Concrete [l, u] after each layer."""
    out = []
    for layer in layers:
        lo, hi = layer_interval(layer, lo, hi)
        out.append((lo, hi))
    return out


def _check_dim(m, b: Box):
    if b.dim != m.input_dim:
        raise DimensionMismatch(f"box has {b.dim} dimensions, model takes {m.input_dim}")


def propagate_box(m, b: Box) -> Box:
    """Sound output box of ``m`` over ``b`` by interval arithmetic."""
    _check_dim(m, b)
    layers = flat_layers(m)
    lo, hi = interval_bounds(layers, b.lower, b.upper)[-1]
    return Box.from_floats(lo, hi)
