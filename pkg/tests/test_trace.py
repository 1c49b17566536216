from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmptraffic.trace import PacketTrace, TraceFormat, empty_trace, load_trace, save_trace


def test_validation():
    with pytest.raises(ValueError):
        PacketTrace([1.0, 0.5], [8, 8])
    with pytest.raises(ValueError):
        PacketTrace([0.0], [0])
    with pytest.raises(ValueError):
        PacketTrace([-1.0], [8])
    with pytest.raises(ValueError):
        PacketTrace([0.0, 1.0], [8])
    with pytest.raises(ValueError):
        PacketTrace([2.0], [8], horizon=1.0)
    with pytest.raises(ValueError):
        PacketTrace([np.nan], [8])


def test_equal_times_allowed_and_readonly():
    t = PacketTrace([0.0, 0.0, 1.0], [1, 2, 3])
    assert len(t) == 3 and t.total_bits == 6
    with pytest.raises(ValueError):
        t.times[0] = 5.0


def test_duration_and_views():
    t = PacketTrace([0.5, 1.0, 2.0], [8, 8, 8])
    assert t.duration == 2.0
    assert PacketTrace([0.5], [8], horizon=3.0).duration == 3.0
    assert empty_trace().duration == 0.0
    assert t.head(2) == PacketTrace([0.5, 1.0], [8, 8])
    seg = t.segment(1, 3)
    assert np.array_equal(seg.times, [0.0, 1.0])


def test_format_parse():
    assert TraceFormat.parse("seconds-bytes") is TraceFormat.SECONDS_BYTES
    assert TraceFormat.parse("SECONDS_BITS") is TraceFormat.SECONDS_BITS
    with pytest.raises(ValueError):
        TraceFormat.parse("ms-bits")


def test_load_bytes_and_comments(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# header\n0.0 100\n\n0.25 40\n1.5 1500\n")
    t = load_trace(p, "seconds-bytes")
    assert np.array_equal(t.lengths, [800, 320, 12000])
    assert load_trace(p, first=2).times.tolist() == [0.0, 0.25]


@pytest.mark.parametrize("body, where", [("0.0 8\n0.5\n", ":2:"), ("0.0 8\n1.0 8\n0.5 8\n", ":3:"),
                                         ("0.0 x\n", ":1:"), ("0.0 -3\n", ":1:")])
def test_load_errors_name_the_line(tmp_path, body, where):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(ValueError, match=where):
        load_trace(p)


def test_load_empty(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("# nothing\n")
    with pytest.raises(ValueError):
        load_trace(p)
    with pytest.raises(ValueError):
        load_trace(p, first=0)


def test_save_bytes_requires_whole_bytes(tmp_path):
    with pytest.raises(ValueError):
        save_trace(PacketTrace([0.0], [12]), tmp_path / "x.txt", "seconds-bytes")
    save_trace(PacketTrace([0.0], [16]), tmp_path / "x.txt", "seconds-bytes")
    assert (tmp_path / "x.txt").read_text() == "0.000000000 2\n"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10**12), st.integers(1, 10**6)), min_size=1, max_size=50))
def test_roundtrip_on_nanosecond_grid(tmp_path_factory, recs):
    recs.sort()
    ns, lengths = zip(*recs)
    t = PacketTrace(np.array(ns) / 1e9, np.array(lengths, dtype=float))
    p = tmp_path_factory.mktemp("rt") / "t.txt"
    save_trace(t, p)
    assert load_trace(p) == t
