"""Downstream epidemiological statistics, rank correlation, and filters."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import make_series
from curvescore.epi_stats import (
    COUNT_LIKE,
    RATE_LIKE,
    STATISTICS,
    UNKNOWN,
    DegenerateInput,
    SeriesStatRecord,
    average_ranks,
    build_stat_record,
    classify_label,
    correlate_metrics,
    growth_rate_fidelity,
    peak_magnitude_error,
    peak_timing_error,
    pearson,
    spearman,
    total_count_error,
)


def test_classify_label_keywords():
    assert classify_label("Weekly cases") == COUNT_LIKE
    assert classify_label("DEATHS") == COUNT_LIKE
    assert classify_label("hospitalization numbers") == COUNT_LIKE
    assert classify_label("incidence rate") == RATE_LIKE
    assert classify_label("cases per 100,000") == RATE_LIKE
    assert classify_label("percentage positive") == RATE_LIKE
    assert classify_label("mystery metric") == UNKNOWN


def test_classify_label_rate_wins_over_count():
    assert classify_label("case rate") == RATE_LIKE


def test_classify_label_overrides():
    overrides = {"mystery metric": COUNT_LIKE}
    assert classify_label("Mystery  Metric", overrides) == COUNT_LIKE
    assert classify_label("mystery metric") == UNKNOWN


def test_total_count_error_values():
    assert total_count_error([110.0], [100.0]) == pytest.approx(0.1, abs=1e-12)
    assert total_count_error([50.0, 50.0], [100.0]) == 0.0
    with pytest.raises(DegenerateInput):
        total_count_error([1.0], [0.0])


@given(
    p=st.lists(st.integers(0, 50).map(float), min_size=1, max_size=8),
    t=st.lists(st.integers(1, 50).map(float), min_size=1, max_size=8),
)
def test_total_count_error_scale_invariant(p, t):
    base = total_count_error(p, t)
    doubled = total_count_error([2 * v for v in p], [2 * v for v in t])
    assert doubled == base


def test_peak_timing_first_maximum_convention():
    assert peak_timing_error([3.0, 1.0, 3.0], [1.0, 3.0, 3.0]) == 1
    assert peak_timing_error([1.0, 9.0], [1.0, 9.0]) == 0
    with pytest.raises(DegenerateInput):
        peak_timing_error([], [1.0, 2.0])
    with pytest.raises(DegenerateInput):
        peak_timing_error([1.0], [0.0, 0.0])


def test_peak_magnitude_error_values():
    assert peak_magnitude_error([80.0], [100.0]) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(DegenerateInput):
        peak_magnitude_error([0.0], [100.0])
    with pytest.raises(DegenerateInput):
        peak_magnitude_error([1.0], [0.0])


@given(
    p=st.lists(st.integers(1, 50).map(float), min_size=1, max_size=8),
    t=st.lists(st.integers(1, 50).map(float), min_size=1, max_size=8),
)
def test_peak_errors_scale_invariant(p, t):
    assert peak_timing_error([2 * v for v in p], [2 * v for v in t]) == peak_timing_error(p, t)
    assert peak_magnitude_error(
        [2 * v for v in p], [2 * v for v in t]
    ) == pytest.approx(peak_magnitude_error(p, t), rel=1e-12)


def test_growth_rate_fidelity_perfect_on_identical():
    t = [0.0, 1.0, 3.0, 9.0, 27.0, 5.0]
    assert growth_rate_fidelity(list(t), t) == pytest.approx(1.0, abs=1e-12)


def test_growth_rate_fidelity_phase_window():
    # Ascending phase runs from the first positive value to the first peak;
    # the noisy tail after the peak must not affect the result.
    t = [0.0, 1.0, 4.0, 16.0, 2.0, 7.0]
    p_good_rise = [0.0, 1.0, 4.0, 16.0, 99.0, 0.0]
    assert growth_rate_fidelity(p_good_rise, t) == pytest.approx(1.0, abs=1e-12)


def test_growth_rate_fidelity_degenerate_cases():
    with pytest.raises(DegenerateInput):
        growth_rate_fidelity([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    with pytest.raises(DegenerateInput):
        growth_rate_fidelity([1.0, 2.0], [1.0, 5.0])  # two-point phase
    with pytest.raises(DegenerateInput):
        growth_rate_fidelity([5.0, 5.0, 5.0], [1.0, 2.0, 4.0])  # constant log


def test_average_ranks_with_ties():
    assert average_ranks([10.0, 20.0, 20.0, 30.0]).tolist() == [1.0, 2.5, 2.5, 4.0]
    assert average_ranks([5.0, 5.0, 5.0]).tolist() == [2.0, 2.0, 2.0]


@given(values=st.lists(st.integers(0, 6).map(float), min_size=1, max_size=10))
def test_average_ranks_match_counting_oracle(values):
    assert average_ranks(values).tolist() == oracles.average_ranks(values)


def test_pearson_zero_variance_is_none():
    assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None
    assert pearson([1.0, 2.0], [5.0, 5.0]) is None


def test_spearman_frozen_examples():
    assert spearman([1, 2, 2, 4, 5], [2, 1, 3, 5, 4]) == pytest.approx(
        0.7181848464596079, abs=1e-15
    )
    assert spearman([3, 3, 1, 2], [1, 2, 2, 5]) == pytest.approx(-0.5, abs=1e-15)


def test_spearman_monotone_records_hit_plus_minus_one():
    x = [1.0, 4.0, 9.0, 16.0]
    assert spearman(x, [2.0, 3.0, 5.0, 50.0]) == pytest.approx(1.0, abs=1e-12)
    assert spearman(x, [50.0, 5.0, 3.0, 2.0]) == pytest.approx(-1.0, abs=1e-12)


def test_spearman_degenerate_cases():
    with pytest.raises(DegenerateInput):
        spearman([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DegenerateInput):
        spearman([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(DegenerateInput):
        spearman([7.0, 7.0, 7.0], [1.0, 2.0, 3.0])


_vectors = st.lists(st.integers(-5, 5).map(float), min_size=3, max_size=12)


@given(x=_vectors, y=_vectors)
def test_spearman_matches_counting_oracle(x, y):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    expected = oracles.spearman(x, y)
    if expected is None:
        with pytest.raises(DegenerateInput):
            spearman(x, y)
    else:
        assert spearman(x, y) == pytest.approx(expected, abs=1e-12)


@given(x=_vectors, y=_vectors)
def test_spearman_invariant_under_monotone_transform(x, y):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    try:
        base = spearman(x, y)
    except DegenerateInput:
        return
    stretched = [math.exp(v) for v in x]
    shifted = [3.0 * v + 7.0 for v in y]
    assert spearman(stretched, shifted) == base


def _record(series_label, p_values, t_values, overrides=None):
    return build_stat_record(
        "corpus",
        "chart",
        make_series(series_label, t_values),
        make_series(series_label, p_values),
        ecs=0.9,
        dtw=0.95,
        overrides=overrides,
    )


def test_build_stat_record_happy_path():
    t = [0.0, 1.0, 3.0, 9.0, 4.0]
    p = [0.0, 1.0, 3.0, 10.0, 4.0]
    record = _record("weekly cases", p, t)
    assert set(record.stats) == set(STATISTICS)
    assert record.filter_flags == {}
    assert record.stats["total_count_error"] == pytest.approx(1 / 17, abs=1e-12)
    assert record.stats["peak_timing_error"] == 0.0


def test_build_stat_record_rate_like_skips_total_count():
    record = _record("positivity rate", [1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    assert record.filter_flags["total_count_error"] == "rate_like"
    assert "total_count_error" not in record.stats


def test_build_stat_record_unknown_label_flag():
    record = _record("mystery metric", [1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    assert record.filter_flags["total_count_error"] == "unknown_label"
    override = _record(
        "mystery metric", [1.0, 2.0, 4.0], [1.0, 2.0, 4.0],
        overrides={"mystery metric": COUNT_LIKE},
    )
    assert "total_count_error" in override.stats


def test_build_stat_record_empty_prediction_flags():
    record = _record("cases", [], [1.0, 2.0, 4.0])
    assert record.filter_flags["peak_timing_error"] == "empty_prediction"
    assert record.filter_flags["peak_magnitude_error"] == "empty_prediction"


def test_build_stat_record_short_phase_flag():
    record = _record("cases", [5.0, 1.0], [5.0, 1.0])
    assert record.filter_flags["growth_rate_fidelity"] == "short_growth_phase"


def test_build_stat_record_log_undefined_flag():
    record = _record("cases", [-2.0, -3.0, -4.0], [1.0, 2.0, 4.0])
    assert record.filter_flags["growth_rate_fidelity"] == "log_undefined"


_maybe_values = st.lists(
    st.one_of(st.none(), st.integers(-2, 30).map(float)), min_size=1, max_size=10
)
_gt_values = st.lists(st.integers(0, 30).map(float), min_size=1, max_size=10)


@given(
    label=st.sampled_from(
        ["weekly cases", "attack rate", "mystery metric", "deaths"]
    ),
    p=_maybe_values,
    t=_gt_values,
)
def test_filters_are_exclusive_and_exhaustive(label, p, t):
    record = build_stat_record(
        "c", "chart", make_series(label, t), make_series(label, p), 0.5, 0.5
    )
    for name in STATISTICS:
        in_stats = name in record.stats
        in_flags = name in record.filter_flags
        assert in_stats != in_flags, name
    assert set(record.stats) | set(record.filter_flags) == set(STATISTICS)


def _stub_record(chart_id, value, ecs, flag_reason=None):
    record = SeriesStatRecord("c", chart_id, "cases", ecs, ecs)
    if flag_reason is None:
        record.stats["total_count_error"] = value
    else:
        record.filter_flags["total_count_error"] = flag_reason
    for name in STATISTICS[1:]:
        record.filter_flags[name] = "stubbed"
    return record


def test_correlate_metrics_counts_and_rows():
    records = [
        _stub_record("a", 0.0, 1.0),
        _stub_record("b", 0.2, 0.8),
        _stub_record("c", 0.5, 0.4),
        _stub_record("d", None, 0.0, flag_reason="rate_like"),
    ]
    rows, flag_counts, warnings = correlate_metrics(records)
    by_name = {row["statistic"]: row for row in rows}
    assert by_name["total_count_error"]["n"] == 3
    assert by_name["total_count_error"]["r_ecs"] == pytest.approx(-1.0, abs=1e-12)
    assert flag_counts["total_count_error"] == {"rate_like": 1}
    assert flag_counts["peak_timing_error"] == {"stubbed": 4}
    # The three stubbed statistics have zero records: omitted with warnings.
    assert len(rows) == 1
    assert sum("row omitted" in w for w in warnings) == 3


def test_correlate_metrics_degenerate_rank_vector_keeps_row():
    records = [
        _stub_record("a", 0.0, 1.0),
        _stub_record("b", 0.0, 0.8),
        _stub_record("c", 0.0, 0.4),
    ]
    rows, _, warnings = correlate_metrics(records)
    assert rows[0]["r_ecs"] is None
    assert any("degenerate" in w for w in warnings)


def test_correlate_metrics_pools_in_sorted_order():
    records = [
        _stub_record("b", 0.1, 0.9),
        _stub_record("a", 0.3, 0.5),
        _stub_record("c", 0.2, 0.7),
    ]
    rows, _, _ = correlate_metrics(records)
    assert rows[0]["n"] == 3
