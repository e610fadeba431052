from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..errors import DimensionMismatch, EmptyFile, NonNumericCell, RaggedRows


@dataclass(frozen=True, eq=False)
class Row:
    features: np.ndarray
    label: Optional[int] = None
    # cell text exactly as written; robustness boxes are built from it
    text: Tuple[str, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class Dataset:
    rows: Tuple[Row, ...]
    feature_dim: int

    def __len__(self):
        return len(self.rows)

    @property
    def features(self) -> np.ndarray:
        return np.stack([r.features for r in self.rows])

    @property
    def labels(self):
        return [r.label for r in self.rows]

    def check_labels(self, num_classes: int):
        for k, r in enumerate(self.rows):
            if r.label is not None and not 0 <= r.label < num_classes:
                raise DimensionMismatch(f"row {k}: label {r.label} outside 0..{num_classes - 1}")


def parse_dataset(source: str, has_label: bool = False) -> Dataset:
    """Read header-free CSV: decimal features, optionally a trailing integer label."""
    rows = []
    width = None
    for lineno, cells in enumerate(csv.reader(io.StringIO(source)), start=1):
        cells = [c.strip() for c in cells]
        if not cells or all(not c for c in cells):
            continue
        if width is None:
            width = len(cells)
            if has_label and width < 2:
                raise RaggedRows(lineno, 2, width)
        elif len(cells) != width:
            raise RaggedRows(lineno, width, len(cells))
        feats = cells[:-1] if has_label else cells
        values = []
        for col, c in enumerate(feats, start=1):
            try:
                v = float(c)
            except ValueError:
                raise NonNumericCell(lineno, col, c) from None
            if not np.isfinite(v):
                raise NonNumericCell(lineno, col, c)
            values.append(v)
        label = None
        if has_label:
            try:
                label = int(cells[-1])
            except ValueError:
                raise NonNumericCell(lineno, width, cells[-1]) from None
        rows.append(Row(np.array(values), label, tuple(feats)))
    if not rows:
        raise EmptyFile("dataset contains no rows")
    return Dataset(tuple(rows), len(rows[0].features))


def load_dataset(path, has_label: bool = False) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"), has_label)
