"""Hand-crafted statistics: 11 per channel, 88 per window."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import CHANNELS
from .base import FeatureVector

HC_FEATURES = (
    "mean",
    "median",
    "min",
    "max",
    "std",
    "q1",
    "q3",
    "spectral_entropy",
    "motion_variation",
    "skewness",
    "kurtosis",
)

WELCH_SEGMENT = 64
# relative variance below which a channel is treated as constant
_DEGENERATE = 1e-24


def hc_names(channels: Sequence[str] = CHANNELS) -> tuple:
    return tuple(f"{c}__{f}" for c in channels for f in HC_FEATURES)


def rank_quantile(x, p):
    """Quantile at rank ``(N + 1) * p`` with linear interpolation.

    Ranks outside ``[1, N]`` clamp to the extremes. Works along the last axis.
    """
    s = np.sort(np.asarray(x, dtype=float), axis=-1)
    n = s.shape[-1]
    r = np.clip((n + 1) * p, 1.0, float(n)) - 1.0
    lo = int(np.floor(r))
    hi = min(lo + 1, n - 1)
    frac = r - lo
    return s[..., lo] + frac * (s[..., hi] - s[..., lo])


def welch_psd(x, segment: int = WELCH_SEGMENT):
    """One-sided Welch periodogram with a rectangular taper.

    Segments of ``min(segment, N)`` samples overlap by half; each has its mean
    removed. Scaling is left relative, which is all entropy needs.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[-1]
    nper = min(segment, n)
    step = nper - nper // 2
    starts = np.arange(0, n - nper + 1, step)
    segs = np.stack([x[..., s:s + nper] for s in starts], axis=-2)
    segs = segs - segs.mean(axis=-1, keepdims=True)
    power = np.abs(np.fft.rfft(segs, axis=-1)) ** 2
    psd = power.mean(axis=-2)
    # fold negative frequencies onto the interior bins
    if nper % 2:
        psd[..., 1:] *= 2
    else:
        psd[..., 1:-1] *= 2
    return psd


def psd_entropy(psd) -> np.ndarray:
    """Shannon entropy in bits of PSD rows normalized to sum to one."""
    psd = np.atleast_2d(np.asarray(psd, dtype=float))
    total = psd.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    p = psd / safe
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    h = terms.sum(axis=-1)
    return np.where(total[..., 0] > 0, h, 0.0)


def spectral_entropy(x, sample_rate_hz: float = 25.0, segment: int = WELCH_SEGMENT):
    """Entropy (bits) of the normalized Welch PSD; 0 for a constant input.

    The sample rate only relabels the frequency axis, so it does not change
    the result; it is accepted for interface symmetry.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    x2 = np.atleast_2d(x)
    h = psd_entropy(welch_psd(x2, segment))
    h = np.where(_degenerate(x2), 0.0, h)
    return float(h[0]) if scalar else h


def motion_variation(x):
    """Mean absolute successive difference, sum over M - 1 steps divided by M."""
    x = np.asarray(x, dtype=float)
    return np.abs(np.diff(x, axis=-1)).sum(axis=-1) / x.shape[-1]


def _central_moments(x):
    mu = x.mean(axis=-1, keepdims=True)
    d = x - mu
    var = np.mean(d * d, axis=-1)
    m3 = np.mean(d ** 3, axis=-1)
    m4 = np.mean(d ** 4, axis=-1)
    return var, m3, m4


def _degenerate(x):
    var = np.var(x, axis=-1)
    scale = np.maximum(np.max(np.abs(x), axis=-1) ** 2, 1e-300)
    return var <= _DEGENERATE * scale


def skewness(x):
    x = np.asarray(x, dtype=float)
    var, m3, _ = _central_moments(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(_degenerate(x), 0.0, m3 / np.where(var > 0, var, 1.0) ** 1.5)
    return out if out.ndim else float(out)


def kurtosis(x):
    """Non-excess kurtosis, 3 for a Gaussian."""
    x = np.asarray(x, dtype=float)
    var, _, m4 = _central_moments(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(_degenerate(x), 0.0, m4 / np.where(var > 0, var, 1.0) ** 2)
    return out if out.ndim else float(out)


def hc_block(series, sample_rate_hz: float = 25.0, welch_segment: int = WELCH_SEGMENT) -> np.ndarray:
    """All 11 statistics for each row of a 2-D array, shape (rows, 11)."""
    x = np.atleast_2d(np.asarray(series, dtype=float))
    cols = [
        x.mean(axis=-1),
        np.median(x, axis=-1),
        x.min(axis=-1),
        x.max(axis=-1),
        np.where(_degenerate(x), 0.0, x.std(axis=-1)),
        rank_quantile(x, 0.25),
        rank_quantile(x, 0.75),
        spectral_entropy(x, sample_rate_hz, welch_segment),
        motion_variation(x),
        np.atleast_1d(skewness(x)),
        np.atleast_1d(kurtosis(x)),
    ]
    return np.column_stack(cols)


def hc_matrix(windows, sample_rate_hz: float = 25.0, welch_segment: int = WELCH_SEGMENT) -> np.ndarray:
    """Feature rows for many windows at once, shape (n_windows, 88)."""
    if not windows:
        return np.zeros((0, len(CHANNELS) * len(HC_FEATURES)))
    stack = np.stack([w.channels for w in windows])
    n, c, length = stack.shape
    block = hc_block(stack.reshape(n * c, length), sample_rate_hz, welch_segment)
    return block.reshape(n, c * len(HC_FEATURES))


def hc_features(window, sample_rate_hz: float = 25.0, welch_segment: int = WELCH_SEGMENT) -> FeatureVector:
    return FeatureVector(hc_names(), hc_matrix([window], sample_rate_hz, welch_segment)[0])
