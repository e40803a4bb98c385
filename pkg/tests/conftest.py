"""Shared fixtures and hypothesis settings for the test suite."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from curvescore.tables import ChartTable, Corpus, TimeSeries

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_series(
    label: str,
    values: list[float | None],
    x_labels: list[str] | None = None,
) -> TimeSeries:
    xs = x_labels if x_labels is not None else [f"w{k + 1}" for k in range(len(values))]
    return TimeSeries(label=label, points=list(zip(xs, values)))


def make_table(
    chart_id: str,
    columns: dict[str, list[float | None]],
    x_labels: list[str] | None = None,
    meta: dict[str, str] | None = None,
) -> ChartTable:
    n = max((len(v) for v in columns.values()), default=0)
    xs = x_labels if x_labels is not None else [f"w{k + 1}" for k in range(n)]
    table = ChartTable(chart_id=chart_id, x_name="week", meta=dict(meta or {}))
    table.series = [make_series(label, vals, xs) for label, vals in columns.items()]
    return table


def make_corpus(name: str, tables: list[ChartTable]) -> Corpus:
    corpus = Corpus(name=name)
    for table in tables:
        corpus.charts[table.chart_id] = table
    return corpus


@pytest.fixture
def series_factory():
    return make_series


@pytest.fixture
def table_factory():
    return make_table


@pytest.fixture
def corpus_factory():
    return make_corpus
