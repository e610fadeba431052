"""Run configuration: CLI flags, config files, and the seed override."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..analyzer import AnalyzerConfig
from ..errors import SchemaError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

BUILTIN_BOX = "builtin-box"
BUILTIN_AFFINE = "builtin-affine"
METAMORPHIC = "metamorphic"
BUILTIN_ENGINES = (BUILTIN_BOX, BUILTIN_AFFINE, METAMORPHIC)

SEED_ENV = "VERIMUX_SEED"


@dataclass(frozen=True)
class RunConfig:
    spec: str = ""
    models: Tuple[Tuple[str, str], ...] = ()
    datasets: Tuple[Tuple[str, str], ...] = ()  # (goal name or "*", path)
    labels: bool = False
    engines: Tuple[str, ...] = (BUILTIN_AFFINE,)
    timeout: float = 60.0
    parallelism: int = 1
    format: str = "text"
    seed: int = 0
    split_budget: int = 256
    max_depth: int = 16
    samples: int = 256
    tolerance: float = 1e-9
    clamp: Optional[Tuple[float, float]] = None
    apply_normalization: bool = False
    adapters: str = ""

    def __post_init__(self):
        if not self.engines:
            raise SchemaError("engines", "at least one engine is required")
        if len(set(self.engines)) != len(self.engines):
            raise SchemaError("engines", "engines must not repeat")
        if self.parallelism < 1:
            raise SchemaError("parallelism", "parallelism must be at least 1")
        if self.format not in ("text", "json"):
            raise SchemaError("format", f"unknown report format {self.format!r}")
        if not self.timeout > 0:
            raise SchemaError("timeout", "timeout must be positive")

    def analyzer_config(self, domain: str) -> AnalyzerConfig:
        return AnalyzerConfig(domain, self.split_budget, self.max_depth, self.samples,
                              self.tolerance, self.seed)

    def config_hash(self) -> str:
        """Digest of the settings that affect verdicts (not paths, width, or format)."""
        d = asdict(self)
        for k in ("parallelism", "format", "spec", "models", "datasets", "adapters", "timeout"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FILE_KEYS = {
    "spec": str, "labels": bool, "timeout": float, "parallelism": int, "format": str, "seed": int,
    "split_budget": int, "max_depth": int, "samples": int, "tolerance": float,
    "apply_normalization": bool, "adapters": str,
}


def load_config_file(path) -> dict:
    """Settings from a TOML or JSON file, validated and converted to field values."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise SchemaError(str(path), f"cannot parse config: {e}") from None
    base = path.parent
    out: dict = {}
    for k, v in data.items():
        key = k.replace("-", "_")
        if key in _FILE_KEYS:
            out[key] = _FILE_KEYS[key](v)
            if key in ("spec", "adapters"):
                out[key] = str(base / v)
        elif key == "engines":
            out[key] = tuple(str(e) for e in (v if isinstance(v, list) else [v]))
        elif key == "models":
            out[key] = tuple((str(i), str(base / p)) for i, p in dict(v).items())
        elif key == "datasets":
            out[key] = tuple((str(g), str(base / p)) for g, p in dict(v).items())
        elif key == "clamp":
            lo, hi = v
            out[key] = (float(lo), float(hi))
        else:
            raise SchemaError(k, "unknown configuration key")
    return out


def seed_from_env(seed: int, environ=None) -> int:
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None or raw == "":
        return seed
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(SEED_ENV, f"not an integer: {raw!r}") from None


def build_config(file_settings: Optional[dict] = None, **overrides) -> RunConfig:
    """Defaults, then the config file, then explicit overrides, then ``VERIMUX_SEED``."""
    kw = dict(file_settings or {})
    kw.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**kw)
    return replace(cfg, seed=seed_from_env(cfg.seed))
