"""Fitted-model container, prediction and model files.

Ridge models are stored as JSON. Forest files start with a magic tag and a
format version, then hold a length-prefixed JSON header followed by the
length-prefixed tree payload.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import BEHAVIOURS
from ..errors import SchemaError, ValidationError
from ..features.base import FeatureMatrix
from .forest import ForestSpec, decode_trees, encode_trees, forest_fit_arrays, forest_predict_idx
from .ridge import RidgeCVSpec, RidgeParams, ridge_fit_arrays, ridge_predict_idx

MODEL_KINDS = ("ridge_cv", "random_forest")
FORMAT_VERSION = 1
_FOREST_MAGIC = b"ABRF"


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    classes: tuple
    feature_names: tuple
    parameters: object  # RidgeParams or a list of trees
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if not self.feature_names:
            raise ValidationError("a model needs at least one feature")
        if len(self.classes) < 2:
            raise ValidationError("a model needs at least two classes")
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))


def order_classes(labels: Sequence[str]) -> tuple:
    """Distinct labels in canonical behaviour order; unknown names sort last."""
    seen = set(labels)
    known = [b for b in BEHAVIOURS if b in seen]
    return tuple(known + sorted(seen.difference(BEHAVIOURS)))


def _training_arrays(X: FeatureMatrix, y):
    y = list(X.labels) if y is None else list(y)
    if len(y) != X.n_rows:
        raise ValidationError(f"{len(y)} labels for {X.n_rows} feature rows")
    classes = order_classes(y)
    if len(classes) < 2:
        raise ValidationError("at least two classes are needed to train")
    lookup = {c: i for i, c in enumerate(classes)}
    return classes, np.array([lookup[v] for v in y], dtype=np.int64)


def ridge_cv_fit(X: FeatureMatrix, y=None, spec: RidgeCVSpec = RidgeCVSpec()) -> TrainedModel:
    """Fit the ridge classifier; ``y`` defaults to the matrix labels."""
    classes, y_idx = _training_arrays(X, y)
    params = ridge_fit_arrays(X.values, y_idx, len(classes), spec)
    spec_dict = {"alphas": list(spec.alphas), "fit_intercept": spec.fit_intercept, "class_weight": spec.class_weight}
    return TrainedModel("ridge_cv", classes, X.names, params, spec_dict)


def forest_fit(X: FeatureMatrix, y=None, spec: ForestSpec = ForestSpec(), threads: int = 1) -> TrainedModel:
    """Fit the random forest; ``y`` defaults to the matrix labels."""
    classes, y_idx = _training_arrays(X, y)
    trees = forest_fit_arrays(X.values, y_idx, len(classes), spec, threads)
    return TrainedModel("random_forest", classes, X.names, trees, asdict(spec))


def fit_model(kind: str, X: FeatureMatrix, y=None, params: dict = None, seed: int = 0, threads: int = 1) -> TrainedModel:
    """Fit ``kind`` with hyperparameters from a plain dict."""
    params = dict(params or {})
    if kind == "ridge_cv":
        if "alpha_range" in params:
            lo, hi = params.pop("alpha_range")
            n = int(params.pop("n_alphas", 100))
            params["alphas"] = tuple(np.logspace(lo, hi, n))
        return ridge_cv_fit(X, y, RidgeCVSpec(**params))
    if kind == "random_forest":
        params.setdefault("seed", seed)
        # config files have no null, so "none" or 0 stand for unlimited depth
        if params.get("max_depth") in ("none", 0):
            params["max_depth"] = None
        return forest_fit(X, y, ForestSpec(**params), threads)
    raise ValidationError(f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")


def check_schema(model: TrainedModel, names: Sequence[str]) -> None:
    names = tuple(names)
    if names == model.feature_names:
        return
    if set(names) == set(model.feature_names):
        raise SchemaError("feature columns are in a different order than at training time")
    missing = [n for n in model.feature_names if n not in set(names)]
    extra = [n for n in names if n not in set(model.feature_names)]
    raise SchemaError(
        f"feature columns do not match the model: {len(missing)} missing (first: {missing[:3]}), "
        f"{len(extra)} unexpected (first: {extra[:3]})"
    )


def predict(model: TrainedModel, X: FeatureMatrix) -> tuple:
    """One label per row of ``X``; column names must match the model exactly."""
    check_schema(model, X.names)
    if X.n_rows == 0:
        return ()
    if model.kind == "ridge_cv":
        idx = ridge_predict_idx(model.parameters, X.values)
    else:
        idx = forest_predict_idx(model.parameters, X.values, len(model.classes))
    return tuple(model.classes[i] for i in idx)


def _ridge_to_dict(model: TrainedModel) -> dict:
    p = model.parameters
    return {
        "format": "accelbeh-model",
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "classes": list(model.classes),
        "feature_names": list(model.feature_names),
        "spec": model.spec,
        "alpha": p.alpha,
        "coef": p.coef.tolist(),
        "intercept": p.intercept.tolist(),
        "mean": p.mean.tolist(),
        "scale": p.scale.tolist(),
        "alphas": p.alphas.tolist(),
        "loo_errors": p.loo_errors.tolist(),
    }


def _ridge_from_dict(d: dict) -> TrainedModel:
    params = RidgeParams(
        coef=np.array(d["coef"], dtype=float).reshape(len(d["feature_names"]), len(d["classes"])),
        intercept=np.array(d["intercept"], dtype=float),
        alpha=float(d["alpha"]),
        mean=np.array(d["mean"], dtype=float),
        scale=np.array(d["scale"], dtype=float),
        loo_errors=np.array(d.get("loo_errors", []), dtype=float),
        alphas=np.array(d.get("alphas", []), dtype=float),
    )
    return TrainedModel(d["kind"], d["classes"], d["feature_names"], params, d.get("spec", {}))


def model_to_bytes(model: TrainedModel) -> bytes:
    if model.kind == "ridge_cv":
        return json.dumps(_ridge_to_dict(model), indent=1).encode("utf-8")
    header = json.dumps(
        {
            "kind": model.kind,
            "classes": list(model.classes),
            "feature_names": list(model.feature_names),
            "spec": model.spec,
        }
    ).encode("utf-8")
    payload = encode_trees(model.parameters, len(model.classes))
    return b"".join(
        [
            _FOREST_MAGIC,
            struct.pack("<I", FORMAT_VERSION),
            struct.pack("<Q", len(header)),
            header,
            struct.pack("<Q", len(payload)),
            payload,
        ]
    )


def model_from_bytes(data: bytes) -> TrainedModel:
    if data[:4] == _FOREST_MAGIC:
        (version,) = struct.unpack_from("<I", data, 4)
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported forest file version {version}")
        (hlen,) = struct.unpack_from("<Q", data, 8)
        header = json.loads(data[16:16 + hlen].decode("utf-8"))
        pos = 16 + hlen
        (plen,) = struct.unpack_from("<Q", data, pos)
        payload = data[pos + 8:pos + 8 + plen]
        if len(payload) != plen:
            raise ValidationError("truncated forest file")
        trees, n_classes = decode_trees(payload)
        if n_classes != len(header["classes"]):
            raise ValidationError("forest payload class count disagrees with its header")
        return TrainedModel(header["kind"], header["classes"], header["feature_names"], trees, header["spec"])
    try:
        d = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"not a model file: {exc}") from None
    if d.get("format") != "accelbeh-model" or d.get("kind") != "ridge_cv":
        raise ValidationError("not a ridge model file")
    if d.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported model file version {d.get('version')}")
    return _ridge_from_dict(d)


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> TrainedModel:
    return model_from_bytes(Path(path).read_bytes())
