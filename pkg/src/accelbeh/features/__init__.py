"""Per-window feature extractors: hand-crafted, Catch24 and MiniROCKET."""

from .base import FeatureMatrix, FeatureVector

__all__ = ["FeatureMatrix", "FeatureVector"]
