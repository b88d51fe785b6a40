"""Synthetic labelled accelerometer recordings.

Each behaviour is an archetype: a static gravity direction plus a dynamic
component that is flat, quasi-periodic or broadband. Animals differ by a
lognormal gain on the dynamic amplitude and a small random rotation of the
collar. Bouts last a whole number of seconds and tile the recording, so the
annotations cover every sample exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import BEHAVIOURS
from .errors import SpecError, ValidationError
from .ingest import AnnotationTrack, Interval, TriAxialSeries, write_accel_csv, write_annotations

GAIN_SIGMA = 0.15
MAX_TILT_DEG = 10.0
DEFAULT_START = 1_700_000_000.0


@dataclass(frozen=True)
class ArchetypeSpec:
    behaviour: str
    base_orientation: Tuple[float, float, float]
    dynamic_amplitude: float
    dominant_freq_hz: Optional[float] = None
    noise_std: float = 0.01
    duration_s: float = 20.0
    # upper edge of the band for aperiodic motion
    bandwidth_hz: float = 5.0
    # relative amplitude on each axis
    axis_weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.behaviour not in BEHAVIOURS:
            raise SpecError(f"unknown behaviour {self.behaviour!r}")
        if self.noise_std < 0:
            raise SpecError("noise_std must be non-negative")
        if self.dynamic_amplitude < 0:
            raise SpecError("dynamic_amplitude must be non-negative")
        if self.duration_s < 1:
            raise SpecError("duration_s must be at least one second")
        if np.linalg.norm(self.base_orientation) == 0:
            raise SpecError("base_orientation must be non-zero")

    def check_rate(self, sample_rate_hz: float) -> None:
        if self.dominant_freq_hz is not None and not 0 < self.dominant_freq_hz < sample_rate_hz / 2:
            raise SpecError(f"{self.behaviour}: dominant frequency must lie below {sample_rate_hz / 2} Hz")


def _unit(v):
    v = np.asarray(v, dtype=float)
    return tuple(v / np.linalg.norm(v))


DEFAULT_ARCHETYPES = (
    ArchetypeSpec("lying", _unit((0.75, 0.1, 0.65)), 0.0, None, 0.01, 20.0),
    ArchetypeSpec("running", _unit((-0.1, 0.0, 1.0)), 0.8, None, 0.03, 16.0, 9.0, (1.0, 0.6, 1.0)),
    ArchetypeSpec("walking", _unit((0.0, 0.0, 1.0)), 0.18, None, 0.02, 20.0, 3.0, (1.0, 0.5, 0.7)),
    ArchetypeSpec("grooming", _unit((0.2, -0.25, 0.95)), 0.15, 3.0, 0.03, 16.0, 5.0, (0.5, 1.0, 0.6)),
    ArchetypeSpec("drinking_milk", _unit((-0.3, 0.0, 0.95)), 0.15, 1.2, 0.03, 16.0, 5.0, (1.0, 0.3, 0.8)),
    ArchetypeSpec("other", _unit((0.05, 0.15, 1.0)), 0.12, None, 0.03, 16.0, 6.0, (0.7, 1.0, 0.7)),
)


def default_archetypes() -> List[ArchetypeSpec]:
    return list(DEFAULT_ARCHETYPES)


def rotation_matrix(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation about a unit ``axis``."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle_rad) * K + (1 - math.cos(angle_rad)) * (K @ K)


def band_noise(rng, n: int, sample_rate_hz: float, low_hz: float, high_hz: float) -> np.ndarray:
    """Unit-variance Gaussian noise restricted to ``[low_hz, high_hz]``."""
    spec = rng.normal(size=n // 2 + 1) + 1j * rng.normal(size=n // 2 + 1)
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate_hz)
    spec[(freqs < low_hz) | (freqs > high_hz)] = 0.0
    x = np.fft.irfft(spec, n)
    sd = x.std()
    return x / sd if sd > 0 else x


def _dynamic(spec: ArchetypeSpec, rng, n: int, fs: float) -> np.ndarray:
    """(n, 3) dynamic acceleration with unit scale before amplitude."""
    out = np.zeros((n, 3))
    if spec.dynamic_amplitude == 0:
        return out
    weights = np.asarray(spec.axis_weights, dtype=float)
    if spec.dominant_freq_hz is not None:
        f = spec.dominant_freq_hz * rng.uniform(0.9, 1.1)
        # slow drift of the instantaneous frequency keeps the rhythm quasi-periodic
        drift = 0.05 * f * band_noise(rng, n, fs, 0.0, 0.2)
        phase = 2 * np.pi * np.cumsum(f + drift) / fs
        for a in range(3):
            offset = rng.uniform(0, 2 * np.pi)
            wave = np.sin(phase + offset) + 0.3 * np.sin(2 * (phase + offset) + rng.uniform(0, 2 * np.pi))
            envelope = 1.0 + 0.2 * band_noise(rng, n, fs, 0.0, 0.3)
            out[:, a] = weights[a] * wave * envelope / 1.05
        out += 0.15 * band_noise(rng, n, fs, 0.5, spec.bandwidth_hz)[:, None] * weights
    else:
        for a in range(3):
            out[:, a] = weights[a] * band_noise(rng, n, fs, 0.5, spec.bandwidth_hz)
    return spec.dynamic_amplitude * out


def _bout_plan(specs, rng, bouts_per_behaviour: int) -> list:
    plan = []
    for spec in specs:
        for _ in range(bouts_per_behaviour):
            seconds = max(1, int(round(spec.duration_s * rng.uniform(0.75, 1.25))))
            plan.append((spec, seconds))
    order = rng.permutation(len(plan))
    return [plan[i] for i in order]


def generate_animal(
    specs: Sequence[ArchetypeSpec],
    animal_index: int,
    seed: int = 0,
    sample_rate_hz: float = 25.0,
    bouts_per_behaviour: int = 2,
    start_time: float = DEFAULT_START,
) -> Tuple[TriAxialSeries, AnnotationTrack]:
    fs = float(sample_rate_hz)
    if abs(fs - round(fs)) > 1e-9:
        raise SpecError("sample_rate_hz must be a whole number so bouts align with samples")
    rng = np.random.default_rng([int(seed), int(animal_index)])
    animal_id = f"animal{animal_index + 1:02d}"
    gain = float(np.exp(rng.normal(0.0, GAIN_SIGMA)))
    axis = rng.normal(size=3)
    tilt = math.radians(rng.uniform(0.0, MAX_TILT_DEG))
    rot = rotation_matrix(axis, tilt)

    blocks = []
    intervals = []
    t0 = start_time
    for spec, seconds in _bout_plan(specs, rng, bouts_per_behaviour):
        n = int(round(seconds * fs))
        static = np.tile(np.asarray(spec.base_orientation, dtype=float), (n, 1))
        dyn = gain * _dynamic(spec, rng, n, fs)
        noise = spec.noise_std * rng.normal(size=(n, 3))
        blocks.append((static + dyn) @ rot.T + noise)
        intervals.append(Interval(spec.behaviour, t0, t0 + seconds))
        t0 += seconds
    samples = np.vstack(blocks)
    series = TriAxialSeries(animal_id, start_time, fs, samples)
    return series, AnnotationTrack(animal_id, tuple(intervals))


def generate(
    specs: Sequence[ArchetypeSpec] = DEFAULT_ARCHETYPES,
    n_animals: int = 12,
    seed: int = 0,
    sample_rate_hz: float = 25.0,
    bouts_per_behaviour: int = 2,
) -> List[Tuple[TriAxialSeries, AnnotationTrack]]:
    """One (series, annotations) pair per synthetic animal."""
    if n_animals < 2:
        raise ValidationError("n_animals must be at least 2")
    specs = list(specs)
    if not specs:
        raise ValidationError("at least one archetype is required")
    for s in specs:
        s.check_rate(sample_rate_hz)
    return [generate_animal(specs, i, seed, sample_rate_hz, bouts_per_behaviour) for i in range(n_animals)]


def write_dataset(dataset, out_dir) -> Tuple[Path, Path]:
    """Write ``accel/<animal>.csv`` and ``annotations/<animal>.csv``."""
    out = Path(out_dir)
    accel_dir, ann_dir = out / "accel", out / "annotations"
    accel_dir.mkdir(parents=True, exist_ok=True)
    ann_dir.mkdir(parents=True, exist_ok=True)
    for series, track in dataset:
        write_accel_csv(series, accel_dir / f"{series.animal_id}.csv")
        write_annotations(track, ann_dir / f"{track.animal_id}.csv")
    return accel_dir, ann_dir
