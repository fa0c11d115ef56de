import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from enginepdm.features import (
    CYCLE_FEATURE, AllConstant, NormStats, SequenceTensor, apply_minmax, fit_minmax,
    invert_minmax, last_window, make_windows, raw_features, select_features,
)
from enginepdm.ingest import FleetData


def constant_fleet(varying=()):
    rng = np.random.default_rng(0)
    rows = np.ones((40, 26))
    rows[:, 0] = 1
    rows[:, 1] = np.arange(1, 41)
    for s in varying:
        rows[:, 4 + s] = rng.normal(0, 1, 40)
    return FleetData({1: rows})


def test_select_features_synthetic(small_fleet):
    names = select_features(small_fleet)
    assert names[0] == CYCLE_FEATURE
    assert len(names) == 15
    # s6 flips between two readings 0.01 apart: variance ~2e-6, below the threshold
    assert "s6" not in names


def test_select_features_edge_cases():
    with pytest.raises(AllConstant):
        select_features(constant_fleet())
    assert select_features(constant_fleet([4])) == [CYCLE_FEATURE, "s4"]


def test_raw_features_columns(small_fleet):
    x = raw_features(small_fleet[1], ["cycle_norm", "s2"])
    assert np.array_equal(x[:, 0], small_fleet[1][:, 1])
    assert np.array_equal(x[:, 1], small_fleet[1][:, 6])


def test_minmax_examples():
    st_ = fit_minmax(np.array([[2.0], [4.0], [6.0]]))
    assert (st_.mins[0], st_.maxs[0]) == (2.0, 6.0)
    c = fit_minmax(np.array([[5.0], [5.0]]))
    assert (c.mins[0], c.maxs[0]) == (5.0, 5.0)
    assert apply_minmax(np.array([[4.0]]), st_)[0, 0] == 0.5
    assert apply_minmax(np.array([[8.0]]), st_)[0, 0] == 1.5
    assert apply_minmax(np.array([[9.0]]), c)[0, 0] == 0.0


def test_minmax_column_scan(small_fleet):
    x = np.concatenate([raw_features(small_fleet[u], ["s2"]) for u in small_fleet])
    stats = fit_minmax(x, ["s2"])
    lo = hi = x[0, 0]
    for v in x[:, 0]:
        lo, hi = min(lo, v), max(hi, v)
    assert (stats.mins[0], stats.maxs[0]) == (lo, hi)


def test_norm_stats_text_round_trip():
    stats = fit_minmax(np.random.default_rng(2).normal(size=(30, 4)), ["a", "b", "c", "d"])
    assert NormStats.from_text("# comment\n" + stats.to_text()) == stats


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(1, 5)), elements=finite))
def test_minmax_range_and_inverse(x):
    stats = fit_minmax(x)
    z = apply_minmax(x, stats)
    assert np.all((z >= 0) & (z <= 1))
    span = stats.maxs - stats.mins
    varying = span > 0
    back = invert_minmax(z, stats)
    tol = 1e-12 * np.maximum(1.0, np.abs(x))
    assert np.all(np.abs(back - x)[:, varying] <= tol[:, varying] + 1e-12 * span[varying])


def test_window_count_examples():
    for n, expected in ((192, 143), (50, 1), (49, 0)):
        w = make_windows(np.zeros((n, 3)), np.zeros(n), 50)
        assert len(w) == expected
        assert w.x.shape == (expected, 50, 3)
        # enumeration oracle
        assert expected == sum(1 for k in range(n) if k + 50 <= n)


def test_last_window():
    assert last_window(np.zeros((31, 2)), np.zeros(31), 50) is None
    s = np.arange(100.0).reshape(50, 2)
    w = last_window(s, np.r_[np.zeros(49), 1], 50, unit_id=7)
    assert np.array_equal(w.x[0], s)
    assert (w.y[0], w.unit_ids[0], w.end_cycles[0]) == (1, 7, 50)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=5), st.integers(1, 12))
def test_window_conservation_and_contiguity(lengths, L):
    rng = np.random.default_rng(len(lengths) * 100 + L)
    parts = []
    series = {}
    for uid, n in enumerate(lengths, start=1):
        s = rng.normal(size=(n, 3))
        lab = (np.arange(n) > n - 5).astype(int)
        series[uid] = (s, lab)
        parts.append(make_windows(s, lab, L, uid))
    t = SequenceTensor.concat(parts)
    assert len(t) == sum(max(0, n - L + 1) for n in lengths)
    for i in range(len(t)):
        s, lab = series[t.unit_ids[i]]
        start = t.end_cycles[i] - L  # zero-based first row
        assert np.array_equal(t.x[i], s[start : start + L])
        assert t.y[i] == lab[t.end_cycles[i] - 1]
