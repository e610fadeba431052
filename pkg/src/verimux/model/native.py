"""Native JSON model format.

Top level ``kind`` selects the model::

    {"kind": "network", "layers": [{"dense": {"w": [[1, -1]], "b": [0]}}, {"relu": {}}]}
    {"kind": "svm", "kernel": "linear" | "rbf", "gamma": 0.5, "classes": [0, 1],
     "functions": [{"support_vectors": [[...]], "dual_coef": [...], "intercept": 0.0}]}
    {"kind": "pipeline", "stages": [<model>, <model>, ...]}
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import DimensionMismatch, SchemaError, UnknownActivation, UnknownKernel, VerimuxError
from .core import DecisionFunction, Dense, Model, NetworkGraph, Pipeline, ReLU, SvmModel


def _get(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return v


def _wrap(path, fn, *args):
    """Re-raise construction errors from the IR with the JSON path attached."""
    try:
        return fn(*args)
    except (SchemaError, DimensionMismatch):
        raise
    except (VerimuxError, ValueError, TypeError) as exc:
        raise SchemaError(path, str(exc)) from None


def model_from_dict(obj, path="$") -> Model:
    kind = _get(obj, "kind", path, str)
    if kind == "network":
        layers = []
        for k, spec in enumerate(_get(obj, "layers", path, list)):
            lp = f"{path}.layers[{k}]"
            if not isinstance(spec, dict) or len(spec) != 1:
                raise SchemaError(lp, "a layer is an object with exactly one key")
            (name, body), = spec.items()
            if name == "dense":
                w = _get(body, "w", f"{lp}.dense", list)
                b = _get(body, "b", f"{lp}.dense", list)
                layers.append(_wrap(lp, Dense, w, b))
            elif name == "relu":
                layers.append(ReLU())
            else:
                raise UnknownActivation(lp, f"unknown layer type {name!r}")
        return NetworkGraph(tuple(layers))
    if kind == "svm":
        kernel = _get(obj, "kernel", path, str)
        if kernel not in ("linear", "rbf"):
            raise UnknownKernel(f"{path}.kernel", f"unknown kernel {kernel!r}")
        funcs = []
        for k, f in enumerate(_get(obj, "functions", path, list)):
            fp = f"{path}.functions[{k}]"
            sv = _get(f, "support_vectors", fp, list)
            if not sv:
                raise SchemaError(f"{fp}.support_vectors", "at least one support vector is required")
            funcs.append(_wrap(fp, DecisionFunction, sv, _get(f, "dual_coef", fp, list),
                               float(_get(f, "intercept", fp))))
        if not funcs:
            raise SchemaError(f"{path}.functions", "at least one decision function is required")
        gamma = obj.get("gamma")
        return _wrap(path, SvmModel, kernel, tuple(funcs), tuple(obj.get("classes", ())),
                     None if gamma is None else float(gamma))
    if kind == "pipeline":
        stages = [model_from_dict(s, f"{path}.stages[{k}]")
                  for k, s in enumerate(_get(obj, "stages", path, list))]
        return Pipeline(tuple(stages))
    raise SchemaError(f"{path}.kind", f"unknown model kind {kind!r}")


def parse_native_model(source: str) -> Model:
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    return model_from_dict(obj)


def model_to_dict(m: Model) -> dict:
    if isinstance(m, NetworkGraph):
        layers = []
        for l in m.layers:
            if isinstance(l, Dense):
                layers.append({"dense": {"w": l.weights.tolist(), "b": l.bias.tolist()}})
            else:
                layers.append({"relu": {}})
        return {"kind": "network", "layers": layers}
    if isinstance(m, SvmModel):
        out = {"kind": "svm", "kernel": m.kernel}
        if m.gamma is not None:
            out["gamma"] = m.gamma
        out["classes"] = list(m.classes)
        out["functions"] = [
            {"support_vectors": f.support_vectors.tolist(), "dual_coef": f.dual_coef.tolist(),
             "intercept": f.intercept} for f in m.functions]
        return out
    if isinstance(m, Pipeline):
        return {"kind": "pipeline", "stages": [model_to_dict(s) for s in m.stages]}
    raise TypeError(f"not a model: {m!r}")


def write_native_model(m: Model) -> str:
    return json.dumps(model_to_dict(m), indent=1) + "\n"


def load_model(path, apply_normalization: bool = False) -> Model:
    """Load a model file, picking the format from the extension (.nnet or .json)."""
    from .nnet import parse_nnet

    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".nnet":
        return parse_nnet(text, apply_normalization=apply_normalization)
    return parse_native_model(text)
