"""Accelerometer-to-behaviour classification pipeline."""

__version__ = "0.1.0"

BEHAVIOURS = ("drinking_milk", "grooming", "lying", "running", "walking", "other")
UNLABELED = "unlabeled"

CHANNELS = ("X", "Y", "Z", "magnitude", "odba", "vedba", "pitch", "roll")
