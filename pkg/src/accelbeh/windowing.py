"""Fixed-length overlapping windows with one behaviour label each."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import List

import numpy as np

from . import BEHAVIOURS, CHANNELS, UNLABELED
from .errors import InputTooShortError, SpecError
from .signal import ChannelSet


@dataclass(frozen=True)
class WindowingSpec:
    duration_s: float = 3.0
    overlap_fraction: float = 0.5
    purity_threshold: float = 1.0

    def __post_init__(self):
        if not self.duration_s > 0:
            raise SpecError("duration_s must be positive")
        if not 0 <= self.overlap_fraction < 1:
            raise SpecError("overlap_fraction must lie in [0, 1)")
        if not 0.5 < self.purity_threshold <= 1:
            raise SpecError("purity_threshold must lie in (0.5, 1]")

    def length(self, sample_rate_hz: float) -> int:
        n = self.duration_s * sample_rate_hz
        if abs(n - round(n)) > 1e-9:
            raise SpecError(f"{self.duration_s} s at {sample_rate_hz} Hz is not a whole number of samples")
        return int(round(n))

    def hop(self, sample_rate_hz: float) -> int:
        h = int(np.floor(self.length(sample_rate_hz) * (1 - self.overlap_fraction) + 1e-9))
        if h < 1:
            raise SpecError("overlap leaves a hop of zero samples")
        return h


@dataclass(frozen=True)
class LabeledWindow:
    animal_id: str
    window_index: int
    start_time: float
    channels: np.ndarray  # shape (8, L), rows in CHANNELS order
    label: str

    def __post_init__(self):
        if self.channels.ndim != 2 or self.channels.shape[0] != len(CHANNELS):
            raise SpecError(f"window channels must be (8, L), got {self.channels.shape}")
        if self.label not in BEHAVIOURS:
            raise SpecError(f"unknown window label {self.label!r}")

    @property
    def length(self):
        return self.channels.shape[1]

    def channel(self, name: str) -> np.ndarray:
        return self.channels[CHANNELS.index(name)]


def window_starts(n: int, length: int, hop: int) -> range:
    if n < length:
        return range(0)
    return range(0, n - length + 1, hop)


def segment(cs: ChannelSet, spec: WindowingSpec = WindowingSpec()) -> List[LabeledWindow]:
    """Cut a labelled channel set into windows.

    A window is kept when it holds no unlabelled sample and its most common
    label covers at least ``purity_threshold`` of it. ``window_index`` counts
    candidate positions, so dropped windows leave gaps in the numbering.
    """
    if cs.labels is None:
        raise SpecError(f"{cs.animal_id}: channel set carries no labels")
    length = spec.length(cs.sample_rate_hz)
    hop = spec.hop(cs.sample_rate_hz)
    if len(cs) < length:
        raise InputTooShortError(f"{cs.animal_id}: {len(cs)} samples is shorter than one window ({length})")
    data = cs.as_array()
    labels = cs.labels
    out = []
    for idx, start in enumerate(window_starts(len(cs), length, hop)):
        lab = labels[start:start + length]
        counts = Counter(lab)
        if UNLABELED in counts:
            continue
        # ties on count resolve to the earliest label in BEHAVIOURS order
        best = max(counts.items(), key=lambda kv: (kv[1], -BEHAVIOURS.index(kv[0])))
        if best[1] < spec.purity_threshold * length - 1e-9:
            continue
        out.append(LabeledWindow(
            cs.animal_id,
            idx,
            cs.start_time + start / cs.sample_rate_hz,
            data[:, start:start + length].copy(),
            best[0],
        ))
    return out


def write_manifest(windows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["animal_id", "window_index", "start_time", "label"])
        for win in windows:
            w.writerow([win.animal_id, win.window_index, f"{win.start_time:.6f}", win.label])


def save_windows(windows, path) -> None:
    """Store windows in one ``.npz`` file (no pickled objects)."""
    if not windows:
        raise SpecError("no windows to save")
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh,
            channels=np.stack([w.channels for w in windows]),
            animal_ids=np.array([w.animal_id for w in windows], dtype=str),
            window_indices=np.array([w.window_index for w in windows], dtype=np.int64),
            start_times=np.array([w.start_time for w in windows], dtype=float),
            labels=np.array([w.label for w in windows], dtype=str),
        )


def load_windows(path) -> List[LabeledWindow]:
    with np.load(path, allow_pickle=False) as z:
        channels = z["channels"]
        return [
            LabeledWindow(str(a), int(i), float(t), channels[k].copy(), str(lab))
            for k, (a, i, t, lab) in enumerate(zip(z["animal_ids"], z["window_indices"], z["start_times"], z["labels"]))
        ]
