"""Feature containers shared by the extractors and the models."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import SchemaError, ShapeError


def schema_hash(names: Sequence[str]) -> str:
    """Short digest of the ordered feature names."""
    h = hashlib.sha256("\n".join(names).encode("utf-8"))
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.names),):
            raise ShapeError(f"{len(self.names)} names but values have shape {values.shape}")
        if len(set(self.names)) != len(self.names):
            raise SchemaError("feature names are not unique")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.names)


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows are windows, columns are named features.

    ``animal_ids``, ``window_indices`` and ``labels`` identify each row.
    """

    names: tuple
    values: np.ndarray
    animal_ids: tuple = ()
    window_indices: tuple = ()
    labels: tuple = ()
    hash: str = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise ShapeError(f"values {values.shape} do not match {len(self.names)} names")
        n = values.shape[0]
        for attr in ("animal_ids", "window_indices", "labels"):
            seq = tuple(getattr(self, attr))
            if seq and len(seq) != n:
                raise ShapeError(f"{attr} has {len(seq)} entries for {n} rows")
            object.__setattr__(self, attr, seq)
        if len(set(self.names)) != len(self.names):
            raise SchemaError("feature names are not unique")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "hash", schema_hash(self.names))

    @property
    def n_rows(self):
        return self.values.shape[0]

    def subset(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        pick = lambda seq: tuple(seq[i] for i in rows) if seq else ()
        return FeatureMatrix(
            self.names, self.values[rows], pick(self.animal_ids), pick(self.window_indices), pick(self.labels)
        )

    @classmethod
    def from_windows(cls, names, values, windows) -> "FeatureMatrix":
        return cls(
            tuple(names),
            values,
            tuple(w.animal_id for w in windows),
            tuple(w.window_index for w in windows),
            tuple(w.label for w in windows),
        )
