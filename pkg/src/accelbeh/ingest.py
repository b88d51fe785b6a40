"""Reading accelerometer and annotation CSVs and aligning them in time."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import BEHAVIOURS, UNLABELED
from .errors import (
    EmptyAlignmentError,
    GapError,
    ParseError,
    StructuralError,
    ValidationError,
)

log = logging.getLogger(__name__)

# one dropped sample is interpolated; anything longer is an outage
GAP_TOLERANCE_PERIODS = 2.0

ACCEL_HEADER = ("timestamp", "x", "y", "z")
ANNOTATION_HEADER = ("behaviour", "start", "stop")


@dataclass(frozen=True)
class TriAxialSeries:
    """Uniformly sampled X/Y/Z acceleration (g) for one animal.

    ``start_time`` is UTC epoch seconds. ``labels`` is ``None`` until the
    series has been aligned with an annotation track; afterwards it holds one
    behaviour string (or ``"unlabeled"``) per sample.
    """

    animal_id: str
    start_time: float
    sample_rate_hz: float
    samples: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ValidationError(f"samples must be (n, 3), got {samples.shape}")
        if len(samples) == 0:
            raise ValidationError("series is empty")
        if not self.sample_rate_hz > 0:
            raise ValidationError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=object)
            if labels.shape != (len(samples),):
                raise ValidationError("labels must have one entry per sample")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) / self.sample_rate_hz

    @property
    def duration(self) -> float:
        return (len(self) - 1) / self.sample_rate_hz

    @property
    def start_datetime(self) -> datetime:
        return datetime.fromtimestamp(self.start_time, tz=timezone.utc)


@dataclass(frozen=True)
class Interval:
    behaviour: str
    start: float
    stop: float

    @property
    def duration(self):
        return self.stop - self.start


@dataclass(frozen=True)
class AnnotationTrack:
    animal_id: str
    intervals: tuple = ()
    # how many input rows carried a behaviour outside the 6-class set
    n_mapped_to_other: int = field(default=0, compare=False)


def parse_timestamp(text: str, epoch: Optional[bool] = None) -> float:
    """Parse epoch seconds or ISO-8601 (naive values are taken as UTC)."""
    text = text.strip()
    if epoch is None:
        epoch = _looks_numeric(text)
    if epoch:
        return float(text)
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _looks_numeric(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _check_header(row, expected, path):
    got = tuple(c.strip().lower() for c in row)
    if got[: len(expected)] != expected:
        raise ParseError(f"{path}: expected header {','.join(expected)}, got {','.join(row)}", line=1)


def parse_accel_csv(path, sample_rate_hz: float, animal_id: Optional[str] = None) -> TriAxialSeries:
    """Read a ``timestamp,x,y,z`` file into a uniformly sampled series.

    A single missing sample (a step of about two periods) is filled by linear
    interpolation. Longer steps raise :class:`GapError`; non-increasing
    timestamps raise :class:`StructuralError`.
    """
    path = Path(path)
    if animal_id is None:
        animal_id = path.stem.split(".")[0]
    period = 1.0 / sample_rate_hz
    times, rows = [], []
    epoch = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", line=1) from None
        _check_header(header, ACCEL_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line=lineno)
            try:
                if epoch is None:
                    epoch = _looks_numeric(row[0])
                t = parse_timestamp(row[0], epoch)
                xyz = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise ParseError(f"malformed row: {exc}", line=lineno) from None
            if times:
                dt = t - times[-1][0]
                if dt <= 0:
                    raise StructuralError("timestamps are not strictly increasing", line=lineno)
                if dt > GAP_TOLERANCE_PERIODS * period * (1 + 1e-6):
                    raise GapError(f"gap of {dt:.3f} s exceeds {GAP_TOLERANCE_PERIODS:g} sample periods", line=lineno)
                if dt > 1.5 * period:
                    prev = rows[-1]
                    rows.append([(a + b) / 2 for a, b in zip(prev, xyz)])
                    times.append((times[-1][0] + period, lineno))
            times.append((t, lineno))
            rows.append(xyz)
    if not rows:
        raise ParseError(f"{path}: no samples", line=2)
    return TriAxialSeries(animal_id, times[0][0], sample_rate_hz, np.array(rows, dtype=float))


def format_value(v: float) -> str:
    return repr(float(v))


def write_accel_csv(series: TriAxialSeries, path) -> None:
    """Write the canonical form read back by :func:`parse_accel_csv`."""
    t = series.times
    with open(path, "w", newline="") as fh:
        fh.write(",".join(ACCEL_HEADER) + "\n")
        for ti, (x, y, z) in zip(t, series.samples):
            fh.write(f"{ti:.6f},{format_value(x)},{format_value(y)},{format_value(z)}\n")


def normalize_behaviour(name: str) -> Optional[str]:
    key = name.strip().lower().replace(" ", "_").replace("-", "_")
    return key if key in BEHAVIOURS else None


def normalize_intervals(intervals: Sequence[Interval]) -> tuple:
    """Sort by start and resolve overlaps.

    When two intervals overlap, the one starting later wins and the earlier
    one is cut at that start. Equal starts resolve in favour of the interval
    that appears later in the input. Intervals cut to zero length vanish.
    """
    order = sorted(range(len(intervals)), key=lambda i: (intervals[i].start, i))
    ordered = [intervals[i] for i in order]
    out = []
    for i, iv in enumerate(ordered):
        stop = iv.stop
        if i + 1 < len(ordered):
            stop = min(stop, ordered[i + 1].start)
        if stop > iv.start:
            out.append(Interval(iv.behaviour, iv.start, stop))
    return tuple(out)


def parse_annotations(path, animal_id: Optional[str] = None) -> AnnotationTrack:
    """Read a ``behaviour,start,stop`` file.

    Behaviours outside the six-class set become ``other``; the count of such
    rows is kept on the track and logged.
    """
    path = Path(path)
    if animal_id is None:
        animal_id = path.stem.split(".")[0]
    raw = []
    mapped = 0
    epoch = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", line=1) from None
        _check_header(header, ANNOTATION_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                if epoch is None:
                    epoch = _looks_numeric(row[1])
                start = parse_timestamp(row[1], epoch)
                stop = parse_timestamp(row[2], epoch)
            except ValueError as exc:
                raise ParseError(f"malformed row: {exc}", line=lineno) from None
            if stop <= start:
                raise ValidationError(f"{path}: line {lineno}: stop must be after start")
            behaviour = normalize_behaviour(row[0])
            if behaviour is None:
                behaviour = "other"
                mapped += 1
            raw.append(Interval(behaviour, start, stop))
    if mapped:
        log.warning("%s: %d annotation rows mapped to 'other'", path, mapped)
    return AnnotationTrack(animal_id, normalize_intervals(raw), mapped)


def write_annotations(track: AnnotationTrack, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(ANNOTATION_HEADER) + "\n")
        for iv in track.intervals:
            fh.write(f"{iv.behaviour},{iv.start:.6f},{iv.stop:.6f}\n")


def align(series: TriAxialSeries, track: AnnotationTrack, offset_s: float = 0.0) -> TriAxialSeries:
    """Attach one label per sample.

    ``offset_s`` is added to annotation times to bring them onto the
    accelerometer clock. A sample at time ``t`` takes the label of the
    interval with ``start <= t < stop``; samples outside every interval are
    ``"unlabeled"``. Any existing labels on ``series`` are replaced, so the
    operation is idempotent.
    """
    if series.animal_id != track.animal_id:
        raise ValidationError(f"animal mismatch: series {series.animal_id!r} vs track {track.animal_id!r}")
    t = series.times
    labels = np.full(len(series), UNLABELED, dtype=object)
    for iv in normalize_intervals(track.intervals):
        lo = np.searchsorted(t, iv.start + offset_s, side="left")
        hi = np.searchsorted(t, iv.stop + offset_s, side="left")
        labels[lo:hi] = iv.behaviour
    if np.all(labels == UNLABELED):
        raise EmptyAlignmentError(f"{series.animal_id}: annotations do not overlap the accelerometer record")
    return replace(series, labels=labels)
