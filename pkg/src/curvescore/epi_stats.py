"""Downstream epidemiological statistics over matched series pairs.

Four per-series statistics describe whether an extraction preserves the
quantities an analyst would actually read off an epidemic curve: the total
count, the peak's position and height, and the growth profile of the
ascending phase. Each statistic applies only where it is meaningful, so a
record carries either a value or one filter flag naming the first failed
precondition. Rank correlations between these statistics and the chart
similarity scores are the evidence that a score tracks analytic usefulness.

All positional statistics index the present-value subsequence of a series
(missing cells do not shift peaks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateInput",
    "COUNT_LIKE",
    "RATE_LIKE",
    "UNKNOWN",
    "classify_label",
    "total_count_error",
    "peak_timing_error",
    "peak_magnitude_error",
    "growth_rate_fidelity",
    "average_ranks",
    "pearson",
    "spearman",
    "SeriesStatRecord",
    "STATISTICS",
    "build_stat_record",
    "correlate_metrics",
]

COUNT_LIKE = "count_like"
RATE_LIKE = "rate_like"
UNKNOWN = "unknown"

RATE_KEYWORDS = (
    "rate",
    "per 100",
    "percent",
    "%",
    "ratio",
    "proportion",
    "incidence rate",
    "positivity",
)
COUNT_KEYWORDS = ("case", "death", "hospitalization", "admission", "count", "number")

LOG_PSEUDOCOUNT = 1.0
MIN_GROWTH_PHASE = 3
MIN_CORRELATION_N = 3


class DegenerateInput(ValueError):
    """The inputs do not support the requested statistic."""


def _normalize(text: str) -> str:
    return " ".join(text.casefold().split())


def classify_label(label: str, overrides: dict[str, str] | None = None) -> str:
    """Classify a series label as count-like, rate-like, or unknown.

    Keyword containment on the normalized label; rate keywords take
    precedence ("case rate" is a rate). Explicit overrides win outright.
    """
    norm = _normalize(label)
    if overrides:
        for key, value in overrides.items():
            if _normalize(key) == norm:
                return value
    if any(kw in norm for kw in RATE_KEYWORDS):
        return RATE_LIKE
    if any(kw in norm for kw in COUNT_KEYWORDS):
        return COUNT_LIKE
    return UNKNOWN


def total_count_error(p_values: list[float], t_values: list[float]) -> float:
    """Relative error of the series sum; ground-truth sum must be positive."""
    s_gt = float(sum(t_values))
    if s_gt <= 0:
        raise DegenerateInput("ground-truth sum must be > 0")
    return abs(float(sum(p_values)) - s_gt) / s_gt


def peak_timing_error(p_values: list[float], t_values: list[float]) -> int:
    """Distance between peak positions (first maximum, present-value index)."""
    if not p_values:
        raise DegenerateInput("prediction has no present values")
    t_arr = np.asarray(t_values, dtype=np.float64)
    if t_arr.size == 0 or t_arr.max() <= 0:
        raise DegenerateInput("ground truth has no defined peak")
    p_arr = np.asarray(p_values, dtype=np.float64)
    return abs(int(p_arr.argmax()) - int(t_arr.argmax()))


def peak_magnitude_error(p_values: list[float], t_values: list[float]) -> float:
    """Relative error of the peak height; both peaks must be positive."""
    if not p_values:
        raise DegenerateInput("prediction has no present values")
    max_t = max(t_values) if t_values else 0.0
    if max_t <= 0:
        raise DegenerateInput("ground truth has no defined peak")
    max_p = max(p_values)
    if max_p <= 0:
        raise DegenerateInput("prediction has no positive peak")
    return abs(max_p - max_t) / max_t


def _ascending_phase(t_values: list[float]) -> tuple[int, int] | None:
    """[first positive value, first maximum] window, or None if no positives."""
    t_arr = np.asarray(t_values, dtype=np.float64)
    if t_arr.size == 0 or t_arr.max() <= 0:
        return None
    start = int(np.argmax(t_arr > 0))
    end = int(t_arr.argmax())
    return start, end


def growth_rate_fidelity(p_values: list[float], t_values: list[float]) -> float:
    """Pearson correlation of log-transformed trajectories over the
    ground-truth ascending phase (first positive value through the peak).

    Requires a phase of at least 3 points, at least 3 pairwise-present
    points, and non-constant log trajectories.
    """
    phase = _ascending_phase(t_values)
    if phase is None:
        raise DegenerateInput("ground truth never becomes positive")
    start, end = phase
    if end - start + 1 < MIN_GROWTH_PHASE:
        raise DegenerateInput("ascending phase shorter than 3 points")
    xs: list[float] = []
    ys: list[float] = []
    for k in range(start, end + 1):
        if k >= len(p_values):
            continue
        pv = p_values[k] + LOG_PSEUDOCOUNT
        tv = t_values[k] + LOG_PSEUDOCOUNT
        if pv <= 0 or tv <= 0:
            raise DegenerateInput("log-transform undefined for values <= -1")
        xs.append(math.log(pv))
        ys.append(math.log(tv))
    if len(xs) < MIN_GROWTH_PHASE:
        raise DegenerateInput("fewer than 3 pairwise-present points")
    r = pearson(xs, ys)
    if r is None:
        raise DegenerateInput("constant log trajectory")
    return r


def average_ranks(values: list[float] | np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def pearson(x: list[float] | np.ndarray, y: list[float] | np.ndarray) -> float | None:
    """Sample correlation; None when either side has zero variance.

    Constancy is decided by comparing elements, not by the accumulated
    deviation: a constant vector's mean can round away from the common
    value, leaving a tiny nonzero sum of squares that is pure noise.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.size == 0 or xa.min() == xa.max() or ya.min() == ya.max():
        return None
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    sxx = float(np.dot(xd, xd))
    syy = float(np.dot(yd, yd))
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.dot(xd, yd) / math.sqrt(sxx * syy))


def spearman(x: list[float] | np.ndarray, y: list[float] | np.ndarray) -> float:
    """Rank correlation with average-tie ranks.

    Raises DegenerateInput on length mismatch, fewer than 3 points, or a
    constant rank vector.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.size != ya.size:
        raise DegenerateInput("length mismatch")
    if xa.size < MIN_CORRELATION_N:
        raise DegenerateInput("need at least 3 points")
    r = pearson(average_ranks(xa), average_ranks(ya))
    if r is None:
        raise DegenerateInput("constant rank vector")
    return r


STATISTICS = (
    "total_count_error",
    "peak_timing_error",
    "peak_magnitude_error",
    "growth_rate_fidelity",
)


@dataclass
class SeriesStatRecord:
    """Per matched series: similarity scores plus downstream statistics.

    stats holds the computed statistics; filter_flags maps each absent
    statistic to the one reason it was filtered out.
    """

    corpus: str
    chart_id: str
    gt_label: str
    ecs: float
    dtw: float
    stats: dict[str, float] = field(default_factory=dict)
    filter_flags: dict[str, str] = field(default_factory=dict)


def build_stat_record(
    corpus: str,
    chart_id: str,
    gt_series,
    pred_series,
    ecs: float,
    dtw: float,
    overrides: dict[str, str] | None = None,
) -> SeriesStatRecord:
    """Compute every applicable statistic for one matched series pair."""
    record = SeriesStatRecord(corpus, chart_id, gt_series.label, ecs, dtw)
    t_vals = gt_series.present_values()
    p_vals = pred_series.present_values()
    label_class = classify_label(gt_series.label, overrides)

    if label_class == RATE_LIKE:
        record.filter_flags["total_count_error"] = "rate_like"
    elif label_class == UNKNOWN:
        record.filter_flags["total_count_error"] = "unknown_label"
    elif sum(t_vals) <= 0:
        record.filter_flags["total_count_error"] = "zero_gt_sum"
    else:
        record.stats["total_count_error"] = total_count_error(p_vals, t_vals)

    t_max = max(t_vals) if t_vals else 0.0
    if t_max <= 0:
        record.filter_flags["peak_timing_error"] = "no_defined_peak"
    elif not p_vals:
        record.filter_flags["peak_timing_error"] = "empty_prediction"
    else:
        record.stats["peak_timing_error"] = float(peak_timing_error(p_vals, t_vals))

    if t_max <= 0:
        record.filter_flags["peak_magnitude_error"] = "no_defined_peak"
    elif not p_vals:
        record.filter_flags["peak_magnitude_error"] = "empty_prediction"
    elif max(p_vals) <= 0:
        record.filter_flags["peak_magnitude_error"] = "zero_pred_peak"
    else:
        record.stats["peak_magnitude_error"] = peak_magnitude_error(p_vals, t_vals)

    phase = _ascending_phase(t_vals)
    if phase is None:
        record.filter_flags["growth_rate_fidelity"] = "no_growth_phase"
    elif phase[1] - phase[0] + 1 < MIN_GROWTH_PHASE:
        record.filter_flags["growth_rate_fidelity"] = "short_growth_phase"
    else:
        try:
            record.stats["growth_rate_fidelity"] = growth_rate_fidelity(p_vals, t_vals)
        except DegenerateInput as exc:
            reason = str(exc)
            if "pairwise" in reason:
                record.filter_flags["growth_rate_fidelity"] = "insufficient_overlap"
            elif "log-transform" in reason:
                record.filter_flags["growth_rate_fidelity"] = "log_undefined"
            else:
                record.filter_flags["growth_rate_fidelity"] = "degenerate"
    return record


def correlate_metrics(
    records: list[SeriesStatRecord],
) -> tuple[list[dict], dict[str, dict[str, int]], list[str]]:
    """Rank-correlate each statistic against both similarity scores.

    Records are pooled in (chart_id, gt_label, corpus) order. Statistics
    with fewer than 3 records are omitted with a warning; a degenerate rank
    vector keeps the row with a null correlation and a warning. Error
    statistics are expected to correlate negatively with similarity,
    growth-rate fidelity positively.
    """
    ordered = sorted(records, key=lambda r: (r.chart_id, r.gt_label, r.corpus))
    rows: list[dict] = []
    warnings: list[str] = []
    flag_counts: dict[str, dict[str, int]] = {name: {} for name in STATISTICS}
    for rec in ordered:
        for name, reason in rec.filter_flags.items():
            counts = flag_counts[name]
            counts[reason] = counts.get(reason, 0) + 1
    for name in STATISTICS:
        present = [r for r in ordered if name in r.stats]
        n = len(present)
        if n < MIN_CORRELATION_N:
            warnings.append(f"{name}: only {n} records, row omitted")
            continue
        values = [r.stats[name] for r in present]
        row: dict = {"statistic": name, "n": n}
        for score_name in ("ecs", "dtw"):
            score_values = [getattr(r, score_name) for r in present]
            try:
                row["r_" + score_name] = spearman(values, score_values)
            except DegenerateInput as exc:
                row["r_" + score_name] = None
                warnings.append(f"{name} vs {score_name}: degenerate ({exc})")
        rows.append(row)
    return rows, flag_counts, warnings
