"""Derived channels: magnitude, dynamic/static split, ODBA, VeDBA, pitch, roll."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
from scipy.signal import sosfilt, sosfiltfilt

from . import CHANNELS
from .errors import FilterDesignError, ValidationError
from .ingest import TriAxialSeries

GRAVITY_CUTOFF_HZ = 0.3
FILTER_ORDER = 6
# impulse response counts as settled once the remaining energy is below this
SETTLE_ENERGY = 1e-9
PAD_SETTLE_MULTIPLE = 3


@dataclass(frozen=True)
class ButterworthSpec:
    sample_rate_hz: float
    cutoff_hz: float = GRAVITY_CUTOFF_HZ
    kind: str = "low_pass"
    order: int = FILTER_ORDER

    def __post_init__(self):
        if self.kind not in ("low_pass", "high_pass"):
            raise FilterDesignError(f"unknown filter kind {self.kind!r}")
        if self.order < 2 or self.order % 2:
            raise FilterDesignError("order must be a positive even integer")
        if not 0 < self.cutoff_hz < self.sample_rate_hz / 2:
            raise FilterDesignError(
                f"cutoff {self.cutoff_hz} Hz must lie in (0, {self.sample_rate_hz / 2}) Hz"
            )


@lru_cache(maxsize=64)
def _design(order, cutoff_hz, sample_rate_hz, kind):
    # prewarped analog cutoff on the unit-free bilinear scale s = (1 - z^-1)/(1 + z^-1)
    omega = np.tan(np.pi * cutoff_hz / sample_rate_hz)
    omega2 = omega * omega
    sos = np.empty((order // 2, 6))
    for k in range(order // 2):
        # conjugate pole pair of the normalized prototype at angle theta off the imaginary axis
        theta = np.pi * (2 * k + 1) / (2 * order)
        damping = 2.0 * np.sin(theta)
        a0 = 1.0 + damping * omega + omega2
        a1 = 2.0 * (omega2 - 1.0)
        a2 = 1.0 - damping * omega + omega2
        if kind == "low_pass":
            b = np.array([omega2, 2 * omega2, omega2])
        else:
            b = np.array([1.0, -2.0, 1.0])
        sos[k, :3] = b / a0
        sos[k, 3:] = [1.0, a1 / a0, a2 / a0]
    return sos


def butterworth_sos(spec: ButterworthSpec) -> np.ndarray:
    """Second-order sections of a digital Butterworth filter.

    Each analog pole pair is mapped through the bilinear transform with the
    cutoff prewarped, so the -3 dB point lands exactly on ``cutoff_hz``.

    Returns
    -------
    ndarray, shape (order // 2, 6)
        Rows of ``[b0, b1, b2, 1, a1, a2]``.
    """
    return _design(spec.order, float(spec.cutoff_hz), float(spec.sample_rate_hz), spec.kind).copy()


@lru_cache(maxsize=64)
def _settle_length(order, cutoff_hz, sample_rate_hz, kind):
    sos = _design(order, cutoff_hz, sample_rate_hz, kind).copy()
    n = 256
    while True:
        impulse = np.zeros(n)
        impulse[0] = 1.0
        h = sosfilt(sos, impulse)
        energy = np.cumsum(h * h)
        if energy[-1] > 0:
            tail = 1.0 - energy / energy[-1]
            idx = np.nonzero(tail < SETTLE_ENERGY)[0]
            # the truncated sum only stands in for the total if the tail is tiny at n
            if len(idx) and idx[0] < n // 2:
                return int(idx[0]) + 1
        n *= 2


def settle_length(spec: ButterworthSpec) -> int:
    """Samples until the impulse response has delivered all but 1e-9 of its energy."""
    return _settle_length(spec.order, float(spec.cutoff_hz), float(spec.sample_rate_hz), spec.kind)


def butterworth_filter(x, spec: ButterworthSpec, zero_phase: bool = True) -> np.ndarray:
    """Filter a 1-D series.

    With ``zero_phase`` the cascade runs forward and backward over an
    odd-reflected extension of ``3 * settle_length`` samples per side (capped
    at ``len(x) - 1``), so the effective order doubles and there is no delay.
    Otherwise a single causal pass is made from rest.
    """
    x = np.asarray(x, dtype=float)
    sos = butterworth_sos(spec)
    if not zero_phase:
        return sosfilt(sos, x)
    if len(x) < 2:
        raise ValidationError("need at least 2 samples to filter")
    pad = min(PAD_SETTLE_MULTIPLE * settle_length(spec), len(x) - 1)
    return sosfiltfilt(sos, x, padtype="odd", padlen=pad)


def magnitude(samples) -> np.ndarray:
    """Vector norm minus one g."""
    s = _xyz(samples)
    return np.sqrt(np.sum(s * s, axis=1)) - 1.0


def dynamic_static_split(series: TriAxialSeries, cutoff_hz: float = GRAVITY_CUTOFF_HZ, order: int = FILTER_ORDER):
    """High-pass (dynamic) and low-pass (static) parts of each axis.

    Returns
    -------
    dynamic, static : ndarray, shape (n, 3)
    """
    fs = series.sample_rate_hz
    hp = ButterworthSpec(fs, cutoff_hz, "high_pass", order)
    lp = ButterworthSpec(fs, cutoff_hz, "low_pass", order)
    s = series.samples
    dynamic = np.column_stack([butterworth_filter(s[:, i], hp) for i in range(3)])
    static = np.column_stack([butterworth_filter(s[:, i], lp) for i in range(3)])
    return dynamic, static


def odba(dynamic) -> np.ndarray:
    return np.sum(np.abs(_xyz(dynamic)), axis=1)


def vedba(dynamic) -> np.ndarray:
    d = _xyz(dynamic)
    return np.sqrt(np.sum(d * d, axis=1))


def pitch_roll(static):
    """Tilt angles (radians) of the gravity vector.

    pitch = atan2(Sz, hypot(Sx, Sy)), roll = atan2(Sy, hypot(Sx, Sz)).
    A zero vector gives 0 for both.
    """
    s = _xyz(static)
    sx, sy, sz = s[:, 0], s[:, 1], s[:, 2]
    # atan2(0, 0) is 0 in numpy, which is the convention we want
    pitch = np.arctan2(sz, np.hypot(sx, sy))
    roll = np.arctan2(sy, np.hypot(sx, sz))
    return pitch, roll


def _xyz(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValidationError(f"expected (n, 3) array, got {a.shape}")
    return a


@dataclass(frozen=True)
class ChannelSet:
    animal_id: str
    sample_rate_hz: float
    channels: Dict[str, np.ndarray]
    labels: Optional[np.ndarray] = None
    start_time: float = 0.0

    def __post_init__(self):
        if tuple(self.channels) != CHANNELS:
            raise ValidationError(f"channels must be exactly {CHANNELS}")
        n = {len(v) for v in self.channels.values()}
        if len(n) != 1:
            raise ValidationError("channels differ in length")
        if self.labels is not None and len(self.labels) != n.pop():
            raise ValidationError("labels length differs from channels")

    def __len__(self):
        return len(self.channels["X"])

    def as_array(self) -> np.ndarray:
        """Channels stacked as shape (8, n) in canonical order."""
        return np.vstack([self.channels[c] for c in CHANNELS])


def derive_channels(series: TriAxialSeries, cutoff_hz: float = GRAVITY_CUTOFF_HZ) -> ChannelSet:
    s = series.samples
    dynamic, static = dynamic_static_split(series, cutoff_hz)
    pitch, roll = pitch_roll(static)
    channels = {
        "X": s[:, 0].copy(),
        "Y": s[:, 1].copy(),
        "Z": s[:, 2].copy(),
        "magnitude": magnitude(s),
        "odba": odba(dynamic),
        "vedba": vedba(dynamic),
        "pitch": pitch,
        "roll": roll,
    }
    return ChannelSet(series.animal_id, series.sample_rate_hz, channels, series.labels, series.start_time)


def write_channels_csv(cs: ChannelSet, path) -> None:
    """Debug dump: one column per channel plus the label."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(CHANNELS) + ["label"])
        labels = cs.labels if cs.labels is not None else [""] * len(cs)
        cols = [cs.channels[c] for c in CHANNELS]
        for i in range(len(cs)):
            w.writerow([repr(float(c[i])) for c in cols] + [labels[i]])


def read_channels_csv(path, animal_id: str, sample_rate_hz: float, start_time: float = 0.0) -> ChannelSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if tuple(header[:8]) != CHANNELS:
        raise ValidationError(f"{path}: unexpected channel header")
    data = np.array([[float(v) for v in r[:8]] for r in body], dtype=float).reshape(-1, 8)
    labels = np.array([r[8] for r in body], dtype=object) if len(header) > 8 else None
    if labels is not None and all(lab == "" for lab in labels):
        labels = None
    channels = {c: data[:, i].copy() for i, c in enumerate(CHANNELS)}
    return ChannelSet(animal_id, sample_rate_hz, channels, labels, start_time)
