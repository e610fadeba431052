"""Affine-bounds propagation with backsubstitution (triangle ReLU relaxation)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInterval
from ..model import Dense, flat_layers
from ..problem import Box
from .interval import _check_dim, layer_interval


def relu_relaxation(l: float, u: float):
    """(lower_slope, lower_intercept, upper_slope, upper_intercept) for ReLU on [l, u]."""
    if l > u:
        raise InvalidInterval(f"lower bound {l} exceeds upper bound {u}")
    if l >= 0:
        return 1.0, 0.0, 1.0, 0.0
    if u <= 0:
        return 0.0, 0.0, 0.0, 0.0
    s = u / (u - l)
    lam = 1.0 if u >= -l else 0.0
    return lam, 0.0, s, -s * l


def _relu_relaxation_vec(l, u):
    out = np.array([relu_relaxation(a, b) for a, b in zip(l, u)]).reshape(-1, 4)
    return out[:, 0], out[:, 1], out[:, 2], out[:, 3]


@dataclass(frozen=True, eq=False)
class AffineBounds:
    """Bounds of one layer's neurons.

    ``lower_coeffs``/``upper_coeffs`` (n x m) with constants are affine forms
    over the previous layer's variables; ``input_*`` are the same bounds
    backsubstituted to the network input; ``lower``/``upper`` are concrete.
    """
    lower_coeffs: np.ndarray
    lower_const: np.ndarray
    upper_coeffs: np.ndarray
    upper_const: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    input_lower_coeffs: np.ndarray
    input_lower_const: np.ndarray
    input_upper_coeffs: np.ndarray
    input_upper_const: np.ndarray


def _step_back(cl, kl, cu, ku, b: AffineBounds):
    """Rewrite forms over a layer's outputs as forms over its inputs."""
    lp, ln = np.maximum(cl, 0.0), np.minimum(cl, 0.0)
    up, un = np.maximum(cu, 0.0), np.minimum(cu, 0.0)
    ncl = lp @ b.lower_coeffs + ln @ b.upper_coeffs
    nkl = kl + lp @ b.lower_const + ln @ b.upper_const
    ncu = up @ b.upper_coeffs + un @ b.lower_coeffs
    nku = ku + up @ b.upper_const + un @ b.lower_const
    return ncl, nkl, ncu, nku


def _concretize(cl, kl, cu, ku, lo, hi):
    low = kl + np.maximum(cl, 0.0) @ lo + np.minimum(cl, 0.0) @ hi
    up = ku + np.maximum(cu, 0.0) @ hi + np.minimum(cu, 0.0) @ lo
    return low, up


def backsubstitute(bounds, cl, kl, cu, ku, upto=None):
    """Push forms over the outputs of ``bounds[upto-1]`` down to the input."""
    upto = len(bounds) if upto is None else upto
    for b in reversed(bounds[:upto]):
        cl, kl, cu, ku = _step_back(cl, kl, cu, ku, b)
    return cl, kl, cu, ku


def propagate_affine(m, b: Box):
    """Per-layer affine bounds and the output box of ``m`` over ``b``.

    Each layer's concrete bounds are intersected with one interval step from
    the previous layer, so the result is never looser than interval propagation.
    """
    _check_dim(m, b)
    layers = flat_layers(m)
    lo, hi = b.lower, b.upper
    bounds: list[AffineBounds] = []
    prev_l, prev_u = lo, hi
    for layer in layers:
        if isinstance(layer, Dense):
            w, c = layer.weights, layer.bias
            al, kl, au, ku = w, c, w, c
        else:
            ls, li, us, ui = _relu_relaxation_vec(prev_l, prev_u)
            al, kl, au, ku = np.diag(ls), li, np.diag(us), ui
        cl, ckl, cu, cku = backsubstitute(bounds, al, kl, au, ku)
        low, up = _concretize(cl, ckl, cu, cku, lo, hi)
        il, iu = layer_interval(layer, prev_l, prev_u)
        low, up = np.maximum(low, il), np.minimum(up, iu)
        up = np.maximum(up, low)
        bounds.append(AffineBounds(al, kl, au, ku, low, up, cl, ckl, cu, cku))
        prev_l, prev_u = low, up
    return bounds, Box.from_floats(prev_l, prev_u)


def linear_form_bounds(bounds, b: Box, out_vec, in_vec=None, const=0.0):
    """[min, max] of ``out_vec . y + in_vec . x + const`` over the box."""
    lo, hi = b.lower, b.upper
    out_vec = np.asarray(out_vec, dtype=float)[None, :]
    cl, kl, cu, ku = backsubstitute(bounds, out_vec, np.zeros(1), out_vec, np.zeros(1))
    if in_vec is not None:
        cl = cl + in_vec
        cu = cu + in_vec
    low, up = _concretize(cl, kl, cu, ku, lo, hi)
    # interval evaluation on the final layer as a second opinion
    yl, yu = bounds[-1].lower, bounds[-1].upper
    v = out_vec[0]
    il = np.maximum(v, 0) @ yl + np.minimum(v, 0) @ yu
    iu = np.maximum(v, 0) @ yu + np.minimum(v, 0) @ yl
    if in_vec is not None:
        il += np.maximum(in_vec, 0) @ lo + np.minimum(in_vec, 0) @ hi
        iu += np.maximum(in_vec, 0) @ hi + np.minimum(in_vec, 0) @ lo
    return max(low[0], il) + const, min(up[0], iu) + const


def influence_scores(bounds: AffineBounds, b: Box) -> np.ndarray:
    """Width times summed |coefficient| of each input across output bounds."""
    total = (np.abs(bounds.input_lower_coeffs).sum(axis=0)
             + np.abs(bounds.input_upper_coeffs).sum(axis=0))
    return b.widths * total
