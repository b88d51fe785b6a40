import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from accelbeh.errors import EmptyAlignmentError, GapError, ParseError, StructuralError, ValidationError
from accelbeh.ingest import (
    AnnotationTrack,
    Interval,
    TriAxialSeries,
    align,
    normalize_intervals,
    parse_accel_csv,
    parse_annotations,
    parse_timestamp,
    write_accel_csv,
    write_annotations,
)


def _write(path, text):
    path.write_text(text)
    return path


def test_three_rows_at_25hz(tmp_path):
    f = _write(tmp_path / "calf7.csv", "timestamp,x,y,z\n0.00,0,0,1\n0.04,0,0,1\n0.08,0.1,0,1\n")
    s = parse_accel_csv(f, 25.0)
    assert s.samples.shape == (3, 3)
    assert s.duration == pytest.approx(0.08)
    assert s.animal_id == "calf7"


def test_gap_error_names_line(tmp_path):
    f = _write(tmp_path / "a.csv", "timestamp,x,y,z\n0.00,0,0,1\n0.04,0,0,1\n1.04,0,0,1\n")
    with pytest.raises(GapError, match="line 4"):
        parse_accel_csv(f, 25.0)


def test_single_dropped_sample_is_interpolated(tmp_path):
    f = _write(tmp_path / "a.csv", "timestamp,x,y,z\n0.00,0,0,1\n0.08,1,0,1\n")
    s = parse_accel_csv(f, 25.0)
    np.testing.assert_allclose(s.samples[:, 0], [0, 0.5, 1])


def test_non_monotone_is_structural(tmp_path):
    f = _write(tmp_path / "a.csv", "timestamp,x,y,z\n0.04,0,0,1\n0.00,0,0,1\n")
    with pytest.raises(StructuralError, match="line 3"):
        parse_accel_csv(f, 25.0)


def test_malformed_row_reports_line(tmp_path):
    f = _write(tmp_path / "a.csv", "timestamp,x,y,z\n0.00,0,0,1\n0.04,zero,0,1\n")
    with pytest.raises(ParseError, match="line 3"):
        parse_accel_csv(f, 25.0)


def test_iso_timestamps():
    assert parse_timestamp("1970-01-01T00:00:10Z") == 10.0
    assert parse_timestamp("1970-01-01T00:00:10") == 10.0
    assert parse_timestamp("12.5") == 12.5


def test_accel_round_trip_is_byte_identical(tmp_path):
    rng = np.random.default_rng(3)
    s = TriAxialSeries("cow", 1_700_000_000.0, 25.0, rng.normal(size=(200, 3)))
    a = tmp_path / "cow.csv"
    b = tmp_path / "cow2.csv"
    write_accel_csv(s, a)
    write_accel_csv(parse_accel_csv(a, 25.0), b)
    assert a.read_bytes() == b.read_bytes()


def test_single_annotation(tmp_path):
    f = _write(tmp_path / "a.csv", "behaviour,start,stop\nlying,0,10\n")
    track = parse_annotations(f)
    assert track.intervals == (Interval("lying", 0.0, 10.0),)
    assert track.intervals[0].duration == 10


def test_nineteen_other_behaviours_map_to_other(tmp_path):
    names = [f"odd_behaviour_{i}" for i in range(19)]
    rows = "".join(f"{n},{i * 2},{i * 2 + 1}\n" for i, n in enumerate(names))
    track = parse_annotations(_write(tmp_path / "a.csv", "behaviour,start,stop\n" + rows))
    assert {iv.behaviour for iv in track.intervals} == {"other"}
    assert track.n_mapped_to_other == 19


def test_stop_before_start_rejected(tmp_path):
    with pytest.raises(ValidationError):
        parse_annotations(_write(tmp_path / "a.csv", "behaviour,start,stop\nlying,5,5\n"))


def test_overlap_later_start_truncates_earlier():
    out = normalize_intervals([Interval("lying", 0, 10), Interval("walking", 5, 12)])
    assert out == (Interval("lying", 0, 5), Interval("walking", 5, 12))


def test_two_interval_cases_exhaustive():
    points = range(0, 8)
    for s1 in points:
        for e1 in points:
            for s2 in points:
                for e2 in points:
                    if e1 <= s1 or e2 <= s2:
                        continue
                    a, b = Interval("lying", s1, e1), Interval("walking", s2, e2)
                    got = normalize_intervals([a, b])
                    grid = np.arange(-1, 25, 0.5)
                    owner = [next((iv.behaviour for iv in got if iv.start <= t < iv.stop), None) for t in grid]
                    # equal starts go to the interval listed later
                    first, second = (a, b) if a.start <= b.start else (b, a)
                    expect = [
                        second.behaviour if second.start <= t < second.stop
                        else first.behaviour if first.start <= t < min(first.stop, second.start)
                        else None
                        for t in grid
                    ]
                    assert owner == expect, (a, b, got)


def _series(n=250, fs=25.0, start=100.0):
    return TriAxialSeries("cow", start, fs, np.zeros((n, 3)))


def test_align_whole_series():
    s = _series()
    out = align(s, AnnotationTrack("cow", (Interval("lying", 100.0, 200.0),)))
    assert set(out.labels) == {"lying"}


def test_offset_shifts_boundary_by_sample_rate():
    s = _series()
    track = AnnotationTrack("cow", (Interval("lying", 100.0, 104.0), Interval("walking", 104.0, 120.0)))
    a = align(s, track, 0.0)
    b = align(s, track, 1.0)
    assert list(b.labels).index("walking") - list(a.labels).index("walking") == 25


def test_align_errors():
    s = _series()
    with pytest.raises(ValidationError):
        align(s, AnnotationTrack("other_cow", (Interval("lying", 100, 110),)))
    with pytest.raises(EmptyAlignmentError):
        align(s, AnnotationTrack("cow", (Interval("lying", 500, 510),)))


@given(st.lists(st.tuples(st.sampled_from(["lying", "walking", "running"]),
                          st.floats(90, 115), st.floats(0.05, 8)), min_size=1, max_size=6),
       st.floats(-2, 2))
def test_align_matches_brute_force(spec, offset):
    s = _series()
    intervals = tuple(Interval(b, st_, st_ + d) for b, st_, d in spec)
    track = AnnotationTrack("cow", intervals)
    norm = normalize_intervals(intervals)
    expect = []
    for t in s.times:
        lab = "unlabeled"
        for iv in norm:
            if iv.start + offset <= t < iv.stop + offset:
                lab = iv.behaviour
        expect.append(lab)
    if all(e == "unlabeled" for e in expect):
        with pytest.raises(EmptyAlignmentError):
            align(s, track, offset)
        return
    out = align(s, track, offset)
    assert list(out.labels) == expect
    # idempotent
    assert list(align(out, track, offset).labels) == expect
    # labelled duration equals clipped interval durations within a sample per boundary
    span_lo, span_hi = s.times[0], s.times[-1] + 1 / s.sample_rate_hz
    clipped = sum(max(0.0, min(iv.stop + offset, span_hi) - max(iv.start + offset, span_lo)) for iv in norm)
    labelled = np.sum(out.labels != "unlabeled") / s.sample_rate_hz
    assert abs(labelled - clipped) <= 2 * len(norm) / s.sample_rate_hz + 1e-9


def test_annotation_round_trip(tmp_path):
    track = AnnotationTrack("cow", (Interval("lying", 0.0, 4.5), Interval("grooming", 4.5, 9.0)))
    p = tmp_path / "cow.csv"
    write_annotations(track, p)
    assert parse_annotations(p).intervals == track.intervals
