import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from accelbeh import CHANNELS
from accelbeh.errors import InputTooShortError, SpecError
from accelbeh.signal import ChannelSet
from accelbeh.windowing import WindowingSpec, load_windows, save_windows, segment, window_starts

FS = 25.0


def channel_set(labels, animal="a", start=0.0):
    n = len(labels)
    data = {c: np.arange(n, dtype=float) + k for k, c in enumerate(CHANNELS)}
    return ChannelSet(animal, FS, data, np.array(labels, dtype=object), start)


def test_length_and_hop():
    spec = WindowingSpec()
    assert spec.length(FS) == 75
    assert spec.hop(FS) == 37
    with pytest.raises(SpecError):
        WindowingSpec(duration_s=3.02).length(FS)


def test_150_uniform_samples_give_three_windows():
    wins = segment(channel_set(["lying"] * 150))
    assert [w.window_index for w in wins] == [0, 1, 2]
    assert [w.start_time for w in wins] == [0.0, 37 / FS, 74 / FS]
    assert all(w.length == 75 for w in wins)
    np.testing.assert_array_equal(wins[1].channel("X"), np.arange(37, 112))


def test_boundary_window_dropped_at_full_purity():
    labels = ["lying"] * 80 + ["walking"] * 80
    wins = segment(channel_set(labels))
    assert [(w.window_index, w.label) for w in wins] == [(0, "lying")]
    # window 1 is 43/75 lying, window 2 is 69/75 walking
    loose = segment(channel_set(labels), WindowingSpec(purity_threshold=0.6))
    assert [(w.window_index, w.label) for w in loose] == [(0, "lying"), (2, "walking")]


def test_unlabeled_samples_drop_window():
    wins = segment(channel_set(["lying"] * 74 + ["unlabeled"] + ["lying"] * 100))
    assert all(w.start_time * FS > 74 for w in wins)


def test_errors():
    with pytest.raises(InputTooShortError):
        segment(channel_set(["lying"] * 50))
    cs = channel_set(["lying"] * 100)
    with pytest.raises(SpecError):
        segment(ChannelSet("a", FS, cs.channels, None))


@given(st.lists(st.tuples(st.sampled_from(["lying", "walking", "running"]), st.integers(1, 200)),
                min_size=1, max_size=5))
def test_window_count_and_uniqueness(runs):
    labels = [lab for lab, k in runs for _ in range(k)]
    if len(labels) < 75:
        return
    wins = segment(channel_set(labels))
    bound = (len(labels) - 75) // 37 + 1
    assert len(wins) <= bound
    if len({lab for lab, _ in runs}) == 1:
        assert len(wins) == bound
    keys = [(w.animal_id, w.start_time) for w in wins]
    assert len(keys) == len(set(keys))
    for w in wins:
        i = int(round(w.start_time * FS))
        assert set(labels[i:i + 75]) == {w.label}


@given(st.integers(75, 400), st.integers(75, 400))
def test_concatenation_is_union_minus_boundary(n1, n2):
    labels = ["lying"] * n1 + ["walking"] * n2
    got = {(w.start_time, w.label) for w in segment(channel_set(labels))}
    expect = set()
    for start in window_starts(n1 + n2, 75, 37):
        block = set(labels[start:start + 75])
        if len(block) == 1:
            expect.add((start / FS, block.pop()))
    assert got == expect


def test_save_load_round_trip(tmp_path):
    wins = segment(channel_set(["grooming"] * 300, animal="cow9", start=5.0))
    save_windows(wins, tmp_path / "w.npz")
    back = load_windows(tmp_path / "w.npz")
    assert len(back) == len(wins)
    for a, b in zip(wins, back):
        assert (a.animal_id, a.window_index, a.start_time, a.label) == (b.animal_id, b.window_index, b.start_time, b.label)
        np.testing.assert_array_equal(a.channels, b.channels)
