"""Feature extraction dispatch and feature-matrix files.

CSV files start with a ``# schema_hash=...`` line followed by a header of
``animal_id,window_index,label`` and the feature names. The ``.npz`` twin
holds the same content in binary form and is preferred for wide matrices.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import SchemaError, SpecError
from .base import FeatureMatrix, schema_hash
from .catch22 import catch24_matrix, catch24_names
from .hc import WELCH_SEGMENT, hc_matrix, hc_names
from .rocket import transform_any

FEATURE_SETS = ("hc", "catch24", "rocket")
ID_COLUMNS = ("animal_id", "window_index", "label")


def extract(windows, feature_set: str, rocket_model=None, sample_rate_hz: float = 25.0,
            welch_segment: int = WELCH_SEGMENT) -> FeatureMatrix:
    """Compute one feature family for a list of windows.

    ``welch_segment`` is the PSD segment length behind the spectral entropy
    of the hand-crafted set.
    """
    if feature_set == "hc":
        names, values = hc_names(), hc_matrix(windows, sample_rate_hz, welch_segment)
    elif feature_set == "catch24":
        names, values = catch24_names(), catch24_matrix(windows)
    elif feature_set == "rocket":
        if rocket_model is None:
            raise SpecError("rocket features need a fitted model")
        names = rocket_model.feature_names
        if windows:
            values = transform_any(rocket_model, np.stack([w.channels for w in windows]))
        else:
            values = np.zeros((0, len(names)))
    else:
        raise SpecError(f"unknown feature set {feature_set!r}; choose from {', '.join(FEATURE_SETS)}")
    return FeatureMatrix.from_windows(names, values, windows)


def write_matrix_csv(fm: FeatureMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_hash={fm.hash}\n")
        w = csv.writer(fh)
        w.writerow(list(ID_COLUMNS) + list(fm.names))
        n = fm.n_rows
        aids = fm.animal_ids or ("",) * n
        widx = fm.window_indices or ("",) * n
        labs = fm.labels or ("",) * n
        for i in range(n):
            w.writerow([aids[i], widx[i], labs[i]] + [repr(float(v)) for v in fm.values[i]])


def read_matrix_csv(path) -> FeatureMatrix:
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema_hash="):
            raise SchemaError(f"{path}: missing schema_hash line")
        expected = first.strip().split("=", 1)[1]
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if tuple(header[:3]) != ID_COLUMNS:
        raise SchemaError(f"{path}: header must start with {','.join(ID_COLUMNS)}")
    names = tuple(header[3:])
    if schema_hash(names) != expected:
        raise SchemaError(f"{path}: feature names do not match the recorded schema hash")
    values = np.array([[float(v) for v in r[3:]] for r in rows], dtype=float).reshape(len(rows), len(names))
    aids = tuple(r[0] for r in rows)
    widx = tuple(int(r[1]) if r[1] != "" else -1 for r in rows)
    labs = tuple(r[2] for r in rows)
    return FeatureMatrix(names, values, aids if any(aids) else (), widx, labs if any(labs) else ())


def write_matrix_npz(fm: FeatureMatrix, path) -> None:
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh,
            names=np.array(fm.names, dtype=str),
            values=fm.values,
            animal_ids=np.array(fm.animal_ids, dtype=str),
            window_indices=np.array(fm.window_indices, dtype=np.int64),
            labels=np.array(fm.labels, dtype=str),
            schema_hash=np.array(fm.hash),
        )


def read_matrix_npz(path) -> FeatureMatrix:
    with np.load(path, allow_pickle=False) as z:
        names = tuple(str(s) for s in z["names"])
        if schema_hash(names) != str(z["schema_hash"]):
            raise SchemaError(f"{path}: feature names do not match the recorded schema hash")
        return FeatureMatrix(
            names,
            z["values"],
            tuple(str(s) for s in z["animal_ids"]),
            tuple(int(i) for i in z["window_indices"]),
            tuple(str(s) for s in z["labels"]),
        )


def save_matrix(fm: FeatureMatrix, path) -> None:
    """Write ``path`` (CSV or .npz by suffix)."""
    path = Path(path)
    if path.suffix == ".npz":
        write_matrix_npz(fm, path)
    else:
        write_matrix_csv(fm, path)


def load_matrix(path) -> FeatureMatrix:
    path = Path(path)
    if path.suffix == ".npz":
        return read_matrix_npz(path)
    return read_matrix_csv(path)
