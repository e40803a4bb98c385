"""Deterministic synthetic corpora for validation and stress tests.

The validation suite builds one ground-truth corpus and four prediction
corpora of graded quality — exact copies, a one-step temporal shift, 10%
multiplicative value noise, and 50% truncation — the canonical regimes a
temporally-aware score must separate. A seeded random corpus generator
produces varied chart/prediction pairs (label renames, extra series,
missing charts, noise, truncation) for decomposition and determinism tests.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np

from .tables import ChartTable, Corpus, TimeSeries, serialize_table

__all__ = [
    "epicurve",
    "weekly_labels",
    "rotating_date_labels",
    "shift_series",
    "validation_suite",
    "shift_fixture",
    "truncation_fixture",
    "random_corpus_pair",
    "write_corpus",
    "metadata_payload",
]

_EPOCH = dt.date(2021, 1, 4)


def epicurve(n: int, peak: int, ratio: float, base: float = 10.0) -> list[float]:
    """Single-peak geometric rise/fall curve rounded to whole counts."""
    values = []
    for k in range(n):
        exponent = k if k <= peak else 2 * peak - k
        values.append(float(round(base * ratio**exponent)))
    return values


def weekly_labels(n: int) -> list[str]:
    """ISO dates one week apart."""
    return [(_EPOCH + dt.timedelta(weeks=k)).isoformat() for k in range(n)]


def rotating_date_labels(n: int) -> list[str]:
    """Distinct dates written in three rotating formats.

    Consecutive labels use different formats, so neighboring x labels are
    dissimilar strings even though the dates are adjacent.
    """
    labels = []
    for k in range(n):
        day = _EPOCH + dt.timedelta(weeks=k)
        if k % 3 == 0:
            labels.append(day.strftime("%b %d %Y"))
        elif k % 3 == 1:
            labels.append(day.isoformat())
        else:
            labels.append(day.strftime("%d.%m.%Y"))
    return labels


def _table(chart_id: str, x_labels: list[str], columns: dict[str, list[float | None]],
           meta: dict[str, str] | None = None) -> ChartTable:
    series = [
        TimeSeries(label=label, points=list(zip(x_labels, values)))
        for label, values in columns.items()
    ]
    return ChartTable(chart_id=chart_id, series=series, meta=dict(meta or {}))


def shift_series(values: list[float]) -> list[float]:
    """Shift values one step later, duplicating the first."""
    return [values[0]] + values[:-1]


def _suite_chart(chart_id: str, n: int, peak: int, ratio: float, base: float,
                 chart_type: str) -> ChartTable:
    return _table(
        chart_id,
        weekly_labels(n),
        {"cases": epicurve(n, peak, ratio, base)},
        meta={
            "chart_type": chart_type,
            "cumulative": "false",
            "set": "validation",
            "source": "synthetic",
        },
    )


def validation_suite() -> tuple[Corpus, dict[str, Corpus]]:
    """Ground truth plus the four graded prediction corpora.

    Prediction quality orders exact > shift > noise > truncation under the
    alignment score; key/value baselines compress that ordering.
    """
    rng = np.random.default_rng(20210104)
    gt = Corpus(name="ground_truth")
    specs = [
        ("suite01", 30, 15, 1.6, 10.0, "line"),
        ("suite02", 30, 14, 1.6, 12.0, "line"),
        ("suite03", 30, 16, 1.6, 8.0, "bar"),
        ("suite04", 30, 15, 1.6, 15.0, "bar"),
        ("suite05", 30, 13, 1.6, 10.0, "line"),
        ("suite06", 30, 17, 1.6, 9.0, "line"),
    ]
    for chart_id, n, peak, ratio, base, chart_type in specs:
        gt.charts[chart_id] = _suite_chart(chart_id, n, peak, ratio, base, chart_type)

    exact = Corpus(name="exact")
    shift = Corpus(name="shift")
    noise = Corpus(name="noise")
    truncation = Corpus(name="truncation")
    for chart_id, table in gt.charts.items():
        x_labels = table.series[0].x_labels()
        values = [v for _, v in table.series[0].points]
        exact.charts[chart_id] = _table(chart_id, x_labels, {"cases": list(values)})
        shift.charts[chart_id] = _table(
            chart_id, x_labels, {"cases": shift_series(values)}
        )
        noisy = [
            v * (1.0 + rng.uniform(-0.1, 0.1)) for v in values
        ]
        noise.charts[chart_id] = _table(chart_id, x_labels, {"cases": noisy})
        half = len(values) // 2
        truncation.charts[chart_id] = _table(
            chart_id, x_labels[:half], {"cases": values[:half]}
        )
    return gt, {
        "exact": exact,
        "shift": shift,
        "noise": noise,
        "truncation": truncation,
    }


def shift_fixture() -> tuple[ChartTable, ChartTable]:
    """A 30-point series whose prediction is value-correct but one step late.

    The x labels rotate through three date formats, so neighboring labels
    are dissimilar; the steep curve (ratio 3) makes same-key values far
    apart. Key/value scores stay low on this chart while the alignment
    score stays high — the shift regime in its sharpest form.
    """
    n = 30
    labels = rotating_date_labels(n)
    values = epicurve(n, peak=15, ratio=3.0, base=1.0)
    gt = _table("shift_regime", labels, {"n": values}, meta={"chart_type": "line"})
    pred = _table("shift_regime", labels, {"n": shift_series(values)})
    return gt, pred


def truncation_fixture() -> tuple[ChartTable, ChartTable]:
    """A 20-point series with a flat tail; the prediction covers half.

    Warping absorbs the missing tail at zero cost; the gap-penalized score
    charges for every missed point.
    """
    rise = [float(k + 1) for k in range(10)]
    values = rise + [rise[-1]] * 10
    labels = weekly_labels(20)
    gt = _table("truncation_regime", labels, {"cases": values})
    pred = _table("truncation_regime", labels[:10], {"cases": values[:10]})
    return gt, pred


_LABEL_POOL = (
    "cases",
    "daily cases",
    "deaths",
    "hospitalizations",
    "icu admissions",
    "number of tests",
    "positivity rate",
    "attack rate per 100k",
    "mystery metric",
)


def _random_gt_chart(rng: np.random.Generator, chart_id: str) -> ChartTable:
    n = int(rng.integers(5, 41))
    n_series = int(rng.integers(1, 4))
    labels = [str(x) for x in rng.choice(_LABEL_POOL, size=n_series, replace=False)]
    x_labels = weekly_labels(n)
    columns: dict[str, list[float | None]] = {}
    for label in labels:
        peak = int(rng.integers(1, n))
        values: list[float | None] = [
            float(round(v)) for v in np.abs(rng.normal(50, 40, size=n))
        ]
        values[peak] = float(round(200 + rng.uniform(0, 100)))
        # sprinkle missing cells but keep at least one present value
        for k in range(n):
            if rng.uniform() < 0.08 and sum(v is not None for v in values) > 1:
                values[k] = None
        columns[label] = values
    table = _table(
        chart_id,
        x_labels,
        columns,
        meta={
            "chart_type": str(rng.choice(["line", "bar", "both"])),
            "cumulative": str(rng.choice(["true", "false"])),
            "set": str(rng.choice(["dashboard", "report"])),
            "source": str(rng.choice(["agency_a", "agency_b"])),
        },
    )
    if "mystery metric" in columns:
        table.label_overrides["mystery metric"] = "count_like"
    return table


def _distort(rng: np.random.Generator, gt: ChartTable) -> ChartTable | None:
    """One randomized prediction for a ground-truth chart (None = missing)."""
    mode = rng.choice(
        ["exact", "noise", "shift", "truncate", "rename", "extra", "missing"]
    )
    if mode == "missing":
        return None
    x_labels = gt.series[0].x_labels()
    pred = ChartTable(chart_id=gt.chart_id, x_name=gt.x_name)
    for s in gt.series:
        values = [v for _, v in s.points]
        label = s.label
        if mode == "noise":
            values = [
                None if v is None else v * (1.0 + rng.uniform(-0.3, 0.3))
                for v in values
            ]
        elif mode == "shift":
            present = [v for v in values if v is not None]
            shifted = shift_series(present) if present else []
            it = iter(shifted)
            values = [None if v is None else next(it) for v in values]
        elif mode == "rename":
            label = label.upper() if rng.uniform() < 0.5 else f"series {int(rng.integers(100))}"
        pred.series.append(TimeSeries(label=label, points=list(zip(x_labels, values))))
    if mode == "truncate":
        keep = max(1, len(x_labels) // 2)
        for s in pred.series:
            s.points = s.points[:keep]
    if mode == "extra":
        pred.series.append(
            TimeSeries(
                label="annotation noise",
                points=[(x, float(rng.integers(0, 5))) for x in x_labels],
            )
        )
    return pred


def random_corpus_pair(n_charts: int, seed: int) -> tuple[Corpus, Corpus]:
    """Seeded ground-truth/prediction corpus pair with varied error modes."""
    rng = np.random.default_rng(seed)
    gt = Corpus(name="ground_truth")
    pred = Corpus(name="model")
    for k in range(n_charts):
        chart_id = f"chart{k:04d}"
        table = _random_gt_chart(rng, chart_id)
        gt.charts[chart_id] = table
        distorted = _distort(rng, table)
        if distorted is not None:
            pred.charts[chart_id] = distorted
    return gt, pred


def write_corpus(corpus: Corpus, directory: str | Path, fmt: str = "tsv") -> list[Path]:
    """Write every chart to <directory>/<chart_id>.<fmt>."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for chart_id in sorted(corpus.charts):
        path = directory / f"{chart_id}.{fmt}"
        path.write_text(serialize_table(corpus.charts[chart_id], fmt), encoding="utf-8")
        paths.append(path)
    return paths


def metadata_payload(corpus: Corpus) -> dict:
    """Sidecar JSON payload for a corpus's chart tags and label overrides."""
    out: dict = {}
    for chart_id in sorted(corpus.charts):
        table = corpus.charts[chart_id]
        entry: dict = dict(table.meta)
        if table.label_overrides:
            entry["label_class_overrides"] = dict(table.label_overrides)
        if entry:
            out[chart_id] = entry
    return out


def write_metadata(corpus: Corpus, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(metadata_payload(corpus), indent=2), encoding="utf-8")
    return path
