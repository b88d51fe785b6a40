"""MiniROCKET: fixed dilated kernels, quantile biases, PPV pooling.

A port of the multivariate MiniROCKET procedure in float64. The 84 kernels
have length 9 with weight -1 everywhere except +2 at three positions. Each
(dilation, kernel) pair sees the sum of a random subset of channels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .. import CHANNELS
from ..errors import InputTooShortError, ShapeError, SpecError
from .base import FeatureVector

KERNEL_LENGTH = 9
KERNEL_INDICES = np.array(list(combinations(range(KERNEL_LENGTH), 3)), dtype=np.int64)
NUM_KERNELS = len(KERNEL_INDICES)  # 84
MAX_DILATIONS_PER_KERNEL = 32
GOLDEN_RATIO = (np.sqrt(5) + 1) / 2
FORMAT_VERSION = 1


def fit_dilations(input_length: int, num_features: int, max_dilations_per_kernel: int = MAX_DILATIONS_PER_KERNEL):
    """Exponentially spaced dilations and how many features each one gets.

    Returns
    -------
    dilations, features_per_dilation : ndarray of int
        ``features_per_dilation`` sums to ``num_features // 84``.
    """
    per_kernel = num_features // NUM_KERNELS
    if per_kernel < 1:
        raise SpecError(f"need at least {NUM_KERNELS} features, got {num_features}")
    true_max = min(per_kernel, max_dilations_per_kernel)
    multiplier = per_kernel / true_max
    max_exponent = np.log2((input_length - 1) / (KERNEL_LENGTH - 1))
    raw = np.logspace(0, max_exponent, true_max, base=2).astype(np.int64)
    dilations, counts = np.unique(raw, return_counts=True)
    counts = (counts * multiplier).astype(np.int64)
    remainder = per_kernel - counts.sum()
    i = 0
    while remainder > 0:
        counts[i] += 1
        remainder -= 1
        i = (i + 1) % len(counts)
    return dilations, counts


def quantile_sequence(n: int) -> np.ndarray:
    """Fractional parts of k * golden ratio for k = 1..n."""
    k = np.arange(1, n + 1, dtype=float)
    return (k * GOLDEN_RATIO) % 1


@njit(cache=True)
def _convolve(summed, dilation, k0, k1, k2):
    """'Same' zero-padded convolution of one series with a two-valued kernel."""
    n = summed.shape[0]
    out = np.zeros(n)
    half = KERNEL_LENGTH // 2
    for tap in range(KERNEL_LENGTH):
        w = -1.0
        if tap == k0 or tap == k1 or tap == k2:
            w = 2.0
        shift = (tap - half) * dilation
        lo = max(0, -shift)
        hi = min(n, n - shift)
        for t in range(lo, hi):
            out[t] += w * summed[t + shift]
    return out


@njit(cache=True)
def _transform(X, dilations, features_per_dilation, channel_counts, channel_indices, biases, kernel_indices):
    n_examples, n_channels, length = X.shape
    n_kernels = kernel_indices.shape[0]
    n_features = biases.shape[0]
    out = np.zeros((n_examples, n_features))
    summed = np.empty(length)
    for e in range(n_examples):
        feature = 0
        combo = 0
        ch_start = 0
        for di in range(dilations.shape[0]):
            d = dilations[di]
            pad = ((KERNEL_LENGTH - 1) * d) // 2
            n_this = features_per_dilation[di]
            for ki in range(n_kernels):
                k = channel_counts[combo]
                summed[:] = 0.0
                for c in range(ch_start, ch_start + k):
                    ch = channel_indices[c]
                    for t in range(length):
                        summed[t] += X[e, ch, t]
                C = _convolve(summed, d, kernel_indices[ki, 0], kernel_indices[ki, 1], kernel_indices[ki, 2])
                if (di + ki) % 2 == 0:
                    lo = 0
                    hi = length
                else:
                    lo = pad
                    hi = length - pad
                span = hi - lo
                for f in range(n_this):
                    b = biases[feature + f]
                    count = 0
                    for t in range(lo, hi):
                        if C[t] > b:
                            count += 1
                    out[e, feature + f] = count / span
                feature += n_this
                combo += 1
                ch_start += k
    return out


@dataclass(frozen=True)
class RocketModel:
    """Everything needed to reproduce a fitted transform.

    ``channel_counts[j]`` channels starting at ``sum(channel_counts[:j])`` in
    ``channel_indices`` feed the j-th (dilation, kernel) combination, which
    are enumerated dilation-major. ``paddings[j]`` tells whether the full
    zero-padded output is pooled (True) or only the part not touching padding.
    """

    input_length: int
    num_channels: int
    dilations: np.ndarray
    features_per_dilation: np.ndarray
    channel_counts: np.ndarray
    channel_indices: np.ndarray
    biases: np.ndarray
    seed: int
    target_features: int
    channel_names: tuple = tuple(CHANNELS)
    paddings: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n_combo = len(self.dilations) * NUM_KERNELS
        if len(self.channel_counts) != n_combo:
            raise ShapeError("channel_counts does not match dilations x kernels")
        if self.channel_counts.sum() != len(self.channel_indices):
            raise ShapeError("channel_indices length does not match channel_counts")
        if len(self.biases) != NUM_KERNELS * int(self.features_per_dilation.sum()):
            raise ShapeError("bias count does not match feature allocation")
        di = np.repeat(np.arange(len(self.dilations)), NUM_KERNELS)
        ki = np.tile(np.arange(NUM_KERNELS), len(self.dilations))
        object.__setattr__(self, "paddings", (di + ki) % 2 == 0)

    @property
    def kernel_position_sets(self):
        return KERNEL_INDICES

    @property
    def num_features(self) -> int:
        return len(self.biases)

    @property
    def feature_names(self) -> tuple:
        return tuple(f"rocket_{i:05d}" for i in range(self.num_features))

    def to_dict(self) -> dict:
        return {
            "format": "minirocket",
            "version": FORMAT_VERSION,
            "input_length": int(self.input_length),
            "num_channels": int(self.num_channels),
            "channel_names": list(self.channel_names),
            "seed": int(self.seed),
            "target_features": int(self.target_features),
            "kernel_position_sets": KERNEL_INDICES.tolist(),
            "dilations": self.dilations.tolist(),
            "features_per_dilation": self.features_per_dilation.tolist(),
            "channel_counts": self.channel_counts.tolist(),
            "channel_indices": self.channel_indices.tolist(),
            "paddings": self.paddings.tolist(),
            "biases": [float(b) for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RocketModel":
        if d.get("format") != "minirocket":
            raise SpecError("not a MiniROCKET model file")
        if np.asarray(d["kernel_position_sets"]).tolist() != KERNEL_INDICES.tolist():
            raise SpecError("kernel position sets differ from this implementation")
        return cls(
            input_length=int(d["input_length"]),
            num_channels=int(d["num_channels"]),
            dilations=np.asarray(d["dilations"], dtype=np.int64),
            features_per_dilation=np.asarray(d["features_per_dilation"], dtype=np.int64),
            channel_counts=np.asarray(d["channel_counts"], dtype=np.int64),
            channel_indices=np.asarray(d["channel_indices"], dtype=np.int64),
            biases=np.asarray(d["biases"], dtype=float),
            seed=int(d["seed"]),
            target_features=int(d["target_features"]),
            channel_names=tuple(d["channel_names"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "RocketModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _as_array(windows) -> np.ndarray:
    if isinstance(windows, np.ndarray):
        X = windows
    else:
        X = np.stack([w.channels for w in windows])
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 3:
        raise ShapeError(f"expected (examples, channels, length), got {X.shape}")
    return X


def _same_convolution(x, dilation, positions):
    """Reference-style convolution of a single (already channel-summed) series."""
    return _convolve(np.ascontiguousarray(x, dtype=float), int(dilation), *[int(p) for p in positions])


def rocket_fit_array(
    X,
    target_features: int = 10_000,
    seed: int = 0,
    max_dilations_per_kernel: int = MAX_DILATIONS_PER_KERNEL,
    channel_names: Optional[Sequence[str]] = None,
) -> RocketModel:
    X = _as_array(X)
    n_examples, n_channels, length = X.shape
    if n_examples < 1:
        raise SpecError("need at least one training window")
    if length < KERNEL_LENGTH:
        raise InputTooShortError(f"windows of {length} samples are shorter than the kernel ({KERNEL_LENGTH})")
    rng = np.random.default_rng(seed)
    dilations, per_dilation = fit_dilations(length, target_features, max_dilations_per_kernel)
    per_kernel = int(per_dilation.sum())
    quantiles = quantile_sequence(NUM_KERNELS * per_kernel)
    n_combo = NUM_KERNELS * len(dilations)

    max_exponent = np.log2(min(n_channels, KERNEL_LENGTH) + 1)
    counts = (2 ** rng.uniform(0, max_exponent, n_combo)).astype(np.int64)
    indices = np.concatenate([rng.choice(n_channels, k, replace=False) for k in counts]).astype(np.int64)

    biases = np.empty(NUM_KERNELS * per_kernel)
    feature = 0
    combo = 0
    ch_start = 0
    for di, d in enumerate(dilations):
        n_this = int(per_dilation[di])
        for ki in range(NUM_KERNELS):
            k = counts[combo]
            chans = indices[ch_start:ch_start + k]
            example = X[rng.integers(n_examples)]
            C = _same_convolution(example[chans].sum(axis=0), d, KERNEL_INDICES[ki])
            biases[feature:feature + n_this] = np.quantile(C, quantiles[feature:feature + n_this])
            feature += n_this
            combo += 1
            ch_start += k
    names = tuple(channel_names) if channel_names is not None else tuple(CHANNELS[:n_channels]) if n_channels <= len(CHANNELS) else tuple(f"c{i}" for i in range(n_channels))
    return RocketModel(length, n_channels, dilations, per_dilation, counts, indices, biases, int(seed), int(target_features), names)


def rocket_fit(training_windows, target_features: int = 10_000, seed: int = 0,
               max_dilations_per_kernel: int = MAX_DILATIONS_PER_KERNEL) -> RocketModel:
    """Fit dilations, channel subsets and biases on training windows only."""
    return rocket_fit_array(training_windows, target_features, seed, max_dilations_per_kernel)


def rocket_transform_array(model: RocketModel, X) -> np.ndarray:
    X = _as_array(X)
    if X.shape[1] != model.num_channels or X.shape[2] != model.input_length:
        raise ShapeError(
            f"model expects ({model.num_channels}, {model.input_length}) windows, got {X.shape[1:]}"
        )
    return _transform(
        X,
        model.dilations,
        model.features_per_dilation,
        model.channel_counts,
        model.channel_indices,
        model.biases,
        KERNEL_INDICES,
    )


def rocket_transform(model: RocketModel, window) -> FeatureVector:
    return FeatureVector(model.feature_names, rocket_transform_array(model, window.channels[None])[0])


@dataclass(frozen=True)
class PerChannelRocket:
    """One univariate transform per channel; features are concatenated."""

    models: tuple
    channel_names: tuple = tuple(CHANNELS)

    @property
    def num_features(self):
        return sum(m.num_features for m in self.models)

    @property
    def feature_names(self):
        return tuple(f"{c}__rocket_{i:05d}" for c, m in zip(self.channel_names, self.models) for i in range(m.num_features))

    def to_dict(self):
        return {"format": "minirocket_per_channel", "version": FORMAT_VERSION,
                "channel_names": list(self.channel_names), "models": [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(RocketModel.from_dict(m) for m in d["models"]), tuple(d["channel_names"]))


def rocket_fit_per_channel(training_windows, target_features: int = 10_000, seed: int = 0) -> PerChannelRocket:
    """Fit an independent univariate model on each channel.

    Each channel gets ``target_features // n_channels`` features, and its own
    seed stream derived from ``(seed, channel)``.
    """
    X = _as_array(training_windows)
    n_channels = X.shape[1]
    models = []
    for c in range(n_channels):
        sub_seed = int(np.random.SeedSequence([seed, c]).generate_state(1)[0])
        models.append(rocket_fit_array(X[:, c:c + 1], target_features // n_channels, sub_seed,
                                       channel_names=(CHANNELS[c] if n_channels == len(CHANNELS) else f"c{c}",)))
    names = tuple(CHANNELS) if n_channels == len(CHANNELS) else tuple(f"c{i}" for i in range(n_channels))
    return PerChannelRocket(tuple(models), names)


def rocket_transform_per_channel(model: PerChannelRocket, X) -> np.ndarray:
    X = _as_array(X)
    return np.hstack([rocket_transform_array(m, X[:, c:c + 1]) for c, m in enumerate(model.models)])


def model_from_dict(d):
    if d.get("format") == "minirocket_per_channel":
        return PerChannelRocket.from_dict(d)
    return RocketModel.from_dict(d)


def transform_any(model, X) -> np.ndarray:
    if isinstance(model, PerChannelRocket):
        return rocket_transform_per_channel(model, X)
    return rocket_transform_array(model, X)


def warmup() -> None:
    rng = np.random.default_rng(0)
    X = rng.normal(size=(2, 2, 20))
    rocket_transform_array(rocket_fit_array(X, 84, 0), X)
