"""Classifiers over feature matrices."""

from .base import (
    MODEL_KINDS,
    TrainedModel,
    fit_model,
    forest_fit,
    load_model,
    predict,
    ridge_cv_fit,
    save_model,
)
from .forest import ForestSpec
from .ridge import RidgeCVSpec

__all__ = [
    "MODEL_KINDS",
    "ForestSpec",
    "RidgeCVSpec",
    "TrainedModel",
    "fit_model",
    "forest_fit",
    "load_model",
    "predict",
    "ridge_cv_fit",
    "save_model",
]
