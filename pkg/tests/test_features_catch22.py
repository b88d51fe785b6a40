import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from accelbeh import CHANNELS
from accelbeh.errors import InputTooShortError
from accelbeh.features.catch22 import (
    CATCH22_NAMES,
    CATCH24_NAMES,
    Catch24Spec,
    autocorrelation,
    catch22_reference_values,
    catch24_matrix,
    catch24_names,
    catch24_vector,
    pnn40,
)
from conftest import make_windows

FIXTURES = Path(__file__).parent / "fixtures"


def _golden():
    series = json.loads((FIXTURES / "catch22_series.json").read_text())
    expected = {}
    with open(FIXTURES / "catch22_golden.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            expected.setdefault(row["input_fixture_id"], {})[row["feature_name"]] = float(row["expected_value"])
    return series, expected


SERIES, EXPECTED = _golden()


@pytest.mark.parametrize("key", sorted(SERIES))
def test_reference_values_match_golden(key):
    got = dict(zip(CATCH22_NAMES, catch22_reference_values(np.array(SERIES[key]))))
    assert set(EXPECTED[key]) == set(CATCH22_NAMES)
    for name, want in EXPECTED[key].items():
        if math.isnan(want):
            assert math.isnan(got[name]), name
        else:
            assert got[name] == pytest.approx(want, rel=1e-4, abs=1e-6), name


@pytest.mark.parametrize("key", sorted(SERIES))
def test_catch24_reports_nan_as_zero(key):
    y = np.array(SERIES[key])
    v = catch24_vector(y)
    assert v.names == CATCH24_NAMES
    want = np.nan_to_num(np.array([EXPECTED[key][n] for n in CATCH22_NAMES]), nan=0.0)
    np.testing.assert_allclose(v.values[:22], want, rtol=1e-4, atol=1e-6)
    assert v.values[22] == pytest.approx(y.mean())
    assert v.values[23] == pytest.approx(y.std(ddof=1))


def test_sine_first_minimum():
    t = np.arange(75)
    vals = dict(zip(CATCH22_NAMES, catch22_reference_values(np.sin(2 * np.pi * t / 25))))
    assert vals["CO_FirstMin_ac"] == 12


def test_autocorrelation_examples():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    assert autocorrelation(x, 0) == pytest.approx(1.0)
    alt = np.array([1.0, -1.0] * 10)
    assert autocorrelation(alt, 1) == pytest.approx(-19 / 20)
    assert autocorrelation(np.full(10, 3.0), 2) == 0
    with pytest.raises(ValueError):
        autocorrelation(x, 50)


@given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-10, 10, allow_nan=False)), st.data())
def test_autocorrelation_loop_oracle(x, data):
    lag = data.draw(st.integers(0, len(x) - 1))
    m = sum(x) / len(x)
    num = sum((x[i] - m) * (x[i + lag] - m) for i in range(len(x) - lag))
    den = sum((v - m) ** 2 for v in x)
    if den < 1e-9:
        return
    assert autocorrelation(x, lag) == pytest.approx(num / den, rel=1e-9, abs=1e-9)


def test_pnn40_examples():
    assert pnn40(np.full(20, 1.0)) == 0
    # z-scored steps of the alternating series are all about 2
    assert pnn40(np.array([0.0, 1.0] * 10)) == pytest.approx(1.0)
    x = np.zeros(11)
    x[5] = 1.0
    # two of ten successive differences are non-zero
    assert pnn40(x) == pytest.approx(0.2)


# continuous draws avoid ties, which rounding could push across a bin edge
@given(st.integers(0, 2**32 - 1), st.sampled_from([40, 75, 120]), st.floats(-10, 10), st.floats(0.5, 5))
def test_catch22_affine_invariance(seed, n, shift, scale):
    rng = np.random.default_rng(seed)
    y = np.cumsum(rng.normal(size=n)) if seed % 2 else rng.normal(size=n)
    a = catch24_vector(y).values[:22]
    b = catch24_vector(scale * y + shift).values[:22]
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8)


def test_lengths_and_finiteness():
    assert len(CATCH24_NAMES) == 24
    names = catch24_names()
    assert len(names) == 192 == len(set(names))
    assert names[0].startswith(CHANNELS[0] + "__")
    wins = make_windows(6, seed=3)
    m = catch24_matrix(wins)
    assert m.shape == (6, 192)
    assert np.isfinite(m).all()
    np.testing.assert_array_equal(m, catch24_matrix(wins))
    np.testing.assert_array_equal(m[2, :24], catch24_vector(wins[2].channels[0]).values)
    assert catch24_matrix(wins, Catch24Spec(include_mean_std=False)).shape == (6, 176)


def test_too_short():
    with pytest.raises(InputTooShortError):
        catch24_vector(np.arange(5.0))
