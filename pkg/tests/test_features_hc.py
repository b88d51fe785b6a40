import numpy as np
import pytest
import scipy.signal
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from accelbeh import CHANNELS
from accelbeh.features.hc import (
    HC_FEATURES,
    hc_block,
    hc_features,
    hc_matrix,
    hc_names,
    kurtosis,
    motion_variation,
    psd_entropy,
    rank_quantile,
    skewness,
    spectral_entropy,
)
from conftest import make_windows

FS = 25.0


def test_names_and_count(windows):
    names = hc_names()
    assert len(names) == 88 == len(set(names))
    assert {n.split("__")[0] for n in names} == set(CHANNELS)
    assert hc_matrix(windows).shape == (len(windows), 88)
    v = hc_features(windows[0])
    assert v.names == names
    np.testing.assert_array_equal(v.values, hc_matrix(windows[:1])[0])


def test_constant_channel_conventions():
    row = dict(zip(HC_FEATURES, hc_block(np.full(75, 2.5))[0]))
    for k in ("mean", "median", "min", "max", "q1", "q3"):
        assert row[k] == 2.5
    for k in ("std", "motion_variation", "skewness", "kurtosis", "spectral_entropy"):
        assert row[k] == 0


def test_motion_variation_alternating():
    x = np.array([0.0, 1.0] * 37 + [0.0])
    assert motion_variation(x) == pytest.approx(74 / 75)
    assert motion_variation([0, 1, 0, 1]) == pytest.approx(3 / 4)
    assert motion_variation(np.full(10, 4.0)) == 0


@given(arrays(np.float64, st.integers(2, 80), elements=st.floats(-100, 100, allow_nan=False)))
def test_motion_variation_loop_oracle(x):
    total = 0.0
    for i in range(1, len(x)):
        total += abs(x[i] - x[i - 1])
    assert motion_variation(x) == pytest.approx(total / len(x), rel=1e-12, abs=1e-12)


def test_moments_examples():
    assert skewness([-1.0, 0.0, 1.0]) == 0
    assert kurtosis([-1.0, 1.0, -1.0, 1.0]) == pytest.approx(1.0)
    assert skewness([0.0, 0.0, 0.0, 1.0]) > 0


@given(arrays(np.float64, st.integers(4, 80), elements=st.floats(-10, 10, allow_nan=False)))
def test_moments_match_scipy(x):
    if np.ptp(x) < 1e-3:
        return
    assert skewness(x) == pytest.approx(scipy.stats.skew(x), rel=1e-9, abs=1e-9)
    assert kurtosis(x) == pytest.approx(scipy.stats.kurtosis(x, fisher=False), rel=1e-9, abs=1e-9)


def test_quartiles_use_weibull_rank():
    rng = np.random.default_rng(0)
    for n in (4, 5, 11, 75):
        x = rng.normal(size=n)
        for p in (0.25, 0.5, 0.75):
            assert rank_quantile(x, p) == pytest.approx(np.quantile(x, p, method="weibull"))


def _independent_entropy(x):
    nper = min(64, len(x))
    _, psd = scipy.signal.welch(x, fs=FS, window="boxcar", nperseg=nper, noverlap=nper // 2, detrend="constant")
    p = psd / psd.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def test_spectral_entropy_against_scipy_welch():
    rng = np.random.default_rng(4)
    for n in (75, 64, 40, 150):
        x = rng.normal(size=n)
        assert spectral_entropy(x, FS) == pytest.approx(_independent_entropy(x), abs=1e-12)


def test_spectral_entropy_sine_and_flat():
    t = np.arange(75) / FS
    assert spectral_entropy(np.sin(2 * np.pi * 5 * t), FS) < 1.0
    assert spectral_entropy(np.zeros(75), FS) == 0
    for k in (1, 8, 33):
        assert psd_entropy(np.ones(k))[0] == pytest.approx(np.log2(k))
    rng = np.random.default_rng(1)
    assert spectral_entropy(rng.normal(size=75), FS) <= np.log2(33) + 1e-12


@given(arrays(np.float64, 75, elements=st.floats(-5, 5, allow_nan=False)),
       st.floats(-10, 10), st.floats(0.1, 10))
def test_affine_properties(x, shift, scale):
    if np.std(x) < 1e-3:
        return
    a = dict(zip(HC_FEATURES, hc_block(x)[0]))
    b = dict(zip(HC_FEATURES, hc_block(x + shift)[0]))
    c = dict(zip(HC_FEATURES, hc_block(scale * x)[0]))
    for k in ("mean", "median", "min", "max", "q1", "q3"):
        assert b[k] == pytest.approx(a[k] + shift, abs=1e-9)
    for k in ("std", "motion_variation"):
        assert b[k] == pytest.approx(a[k], abs=1e-9)
    for k in ("skewness", "kurtosis", "spectral_entropy"):
        assert c[k] == pytest.approx(a[k], rel=1e-7, abs=1e-7)
    assert a["min"] <= a["q1"] <= a["median"] <= a["q3"] <= a["max"]


def test_std_uses_population_divisor():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    row = dict(zip(HC_FEATURES, hc_block(x)[0]))
    assert row["std"] == pytest.approx(np.sqrt(1.25))


def test_deterministic():
    w = make_windows(5, seed=9)
    np.testing.assert_array_equal(hc_matrix(w), hc_matrix(w))


def test_welch_segment_only_changes_entropy():
    w = make_windows(3, seed=2)
    a = hc_matrix(w)
    b = hc_matrix(w, FS, 32)
    entropy_cols = np.array([n.endswith("__spectral_entropy") for n in hc_names()])
    np.testing.assert_array_equal(a[:, ~entropy_cols], b[:, ~entropy_cols])
    assert not np.array_equal(a[:, entropy_cols], b[:, entropy_cols])
