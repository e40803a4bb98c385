"""Corpus evaluation engine: scoring, reports, sweeps, and agreement."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_corpus, make_table
from curvescore.engine import (
    ALL_METRICS,
    DEFAULT_GROUP_BY,
    LAMBDA_GRID,
    NLS_GRID,
    THETA_GRID,
    ConfigError,
    EngineConfig,
    MismatchedCorpora,
    agreement_report,
    evaluate_report,
    score_chart,
    sweep_report,
)
from curvescore.reporting import report_json
from curvescore.synthetic import random_corpus_pair, validation_suite
from curvescore.tables import Corpus, EmptyCorpus

CFG = EngineConfig(fixed_clock=True)


def test_config_defaults_and_canonical_metric_order():
    assert CFG.theta == 0.01
    assert CFG.gap_penalty == 1.0
    assert CFG.nls_threshold == 0.5
    assert CFG.metrics == ALL_METRICS
    assert CFG.group_by == DEFAULT_GROUP_BY
    reordered = EngineConfig(metrics=("rms", "ecs", "rms", "dtw"))
    assert reordered.metrics == ("ecs", "dtw", "rms")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"theta": 0.0},
        {"gap_penalty": -1.0},
        {"nls_threshold": 1.0},
        {"nls_threshold": -0.1},
        {"metrics": ()},
        {"metrics": ("ecs", "bogus")},
        {"jobs": 0},
        {"jobs": True},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        EngineConfig(**kwargs)


def _single_chart_corpora(gt_table, pred_table):
    return make_corpus("gt", [gt_table]), make_corpus("pred", [pred_table])


def test_chart_score_is_mean_of_series_scores():
    gt = make_table(
        "c",
        {"cases": [1.0, 2.0, 4.0], "deaths": [1.0, 1.0, 2.0], "lost": [3.0, 1.0, 2.0]},
    )
    pred = make_table("c", {"cases": [1.0, 2.0, 4.0], "deaths": [9.0, 9.0, 9.0]})
    outcome = score_chart(gt, pred, None, CFG, "pred")
    per_series = {
        row["gt_label"]: row["ecs"]
        for row in outcome.per_series
        if row["gt_label"] is not None
    }
    # Unmatched ground-truth series score zero and still count in the mean.
    assert per_series["lost"] == 0.0
    expected = (per_series["cases"] + per_series["deaths"] + per_series["lost"]) / 3
    assert outcome.ecs == expected
    assert outcome.decomposition.ecs == outcome.ecs


def test_parse_failure_scores_as_no_data():
    gt = make_table("c", {"cases": [1.0, 2.0]})
    outcome = score_chart(gt, None, "ragged row", CFG, "pred")
    assert outcome.ecs == 0.0
    assert outcome.decomposition.no_data_extracted == 1.0
    assert any("unusable" in w for w in outcome.warnings)
    rows = [row for row in outcome.per_series if row["gt_label"] == "cases"]
    assert rows and rows[0]["ecs"] == 0.0


def test_missing_prediction_chart_scores_as_no_data():
    gt = make_table("c", {"cases": [1.0, 2.0]})
    outcome = score_chart(gt, None, None, CFG, "pred")
    assert outcome.ecs == 0.0
    assert outcome.decomposition.no_data_extracted == 1.0
    assert any("missing" in w for w in outcome.warnings)


def test_report_shape_and_sections():
    gt, pred = _single_chart_corpora(
        make_table("c", {"cases": [1.0, 2.0, 4.0]}),
        make_table("c", {"cases": [1.0, 2.0, 4.0]}),
    )
    report = evaluate_report(gt, [pred], CFG)
    assert list(report) == ["meta", "charts", "corpus", "groups", "downstream", "sweep"]
    assert report["downstream"] is None and report["sweep"] is None
    assert report["meta"]["mode"] == "evaluate"
    assert report["meta"]["schema_version"] == 1
    assert report["meta"]["params"] == {
        "theta": 0.01,
        "lambda": 1.0,
        "nls_threshold": 0.5,
    }
    assert report["meta"]["generated_at"] == "1970-01-01T00:00:00Z"
    assert "conventions" in report["meta"]
    assert report["corpus"]["pred"]["ecs"] == 1.0
    assert report["corpus"]["pred"]["n_charts"] == 1


def test_corpus_mean_is_unweighted_across_charts():
    # One many-series chart and one single-series chart: the corpus score
    # averages the two chart scores, not the five series scores.
    gt = make_corpus(
        "gt",
        [
            make_table(
                "big",
                {f"series {k}": [1.0, 2.0, 4.0] for k in range(4)},
            ),
            make_table("small", {"cases": [1.0, 2.0, 4.0]}),
        ],
    )
    pred = make_corpus(
        "pred",
        [
            make_table(
                "big",
                {f"series {k}": [1.0, 2.0, 4.0] for k in range(4)},
            ),
            make_table("small", {"cases": [9.0, 9.0, 9.0]}),
        ],
    )
    report = evaluate_report(gt, [pred], CFG)
    charts = report["charts"]["pred"]
    expected = (charts["big"]["ecs"] + charts["small"]["ecs"]) / 2
    assert report["corpus"]["pred"]["ecs"] == expected


def test_extra_prediction_chart_warns():
    gt = make_corpus("gt", [make_table("a", {"cases": [1.0, 2.0]})])
    pred = make_corpus(
        "pred",
        [
            make_table("a", {"cases": [1.0, 2.0]}),
            make_table("ghost", {"cases": [1.0, 2.0]}),
        ],
    )
    report = evaluate_report(gt, [pred], CFG)
    assert any(
        "ghost" in w and "no ground truth" in w for w in report["meta"]["warnings"]
    )
    assert "ghost" not in report["charts"]["pred"]


def test_duplicate_prediction_names_rejected():
    gt, pred = _single_chart_corpora(
        make_table("c", {"cases": [1.0, 2.0]}),
        make_table("c", {"cases": [1.0, 2.0]}),
    )
    other = make_corpus("pred", [make_table("c", {"cases": [1.0, 2.0]})])
    with pytest.raises(ConfigError):
        evaluate_report(gt, [pred, other], CFG)


def test_empty_ground_truth_charts_rejected():
    with pytest.raises(EmptyCorpus):
        evaluate_report(Corpus(name="gt"), [Corpus(name="p")], CFG)


def test_group_summaries_partition_and_recompose():
    gt_corpus, preds = validation_suite()
    report = evaluate_report(gt_corpus, [preds["noise"]], CFG)
    charts = report["charts"]["noise"]
    groups = report["groups"]["noise"]
    for tag in ("chart_type", "cumulative", "set", "source"):
        buckets = groups[tag]
        total = sum(s["n_charts"] for s in buckets.values())
        assert total == len(charts)
        weighted = sum(s["ecs"] * s["n_charts"] for s in buckets.values())
        corpus_mean = report["corpus"]["noise"]["ecs"]
        assert weighted / total == pytest.approx(corpus_mean, abs=1e-9)


def test_unknown_group_tag_warns_and_is_skipped():
    gt, pred = _single_chart_corpora(
        make_table("c", {"cases": [1.0, 2.0]}, meta={"chart_type": "line"}),
        make_table("c", {"cases": [1.0, 2.0]}),
    )
    cfg = EngineConfig(fixed_clock=True, group_by=("chart_type", "nonexistent_tag"))
    report = evaluate_report(gt, [pred], cfg)
    assert "nonexistent_tag" not in report["groups"]["pred"]
    assert any("nonexistent_tag" in w for w in report["meta"]["warnings"])


def test_serial_and_concurrent_runs_are_byte_identical():
    gt_corpus, pred_corpus = random_corpus_pair(30, seed=7)
    serial = evaluate_report(gt_corpus, [pred_corpus], CFG)
    concurrent = evaluate_report(
        gt_corpus, [pred_corpus], EngineConfig(fixed_clock=True, jobs=4)
    )
    assert report_json(serial) == report_json(concurrent)


def test_decompose_mode_restricts_metrics():
    gt, pred = _single_chart_corpora(
        make_table("c", {"cases": [1.0, 2.0, 4.0]}),
        make_table("c", {"cases": [1.0, 4.0]}),
    )
    report = evaluate_report(gt, [pred], CFG, mode="decompose")
    assert report["meta"]["mode"] == "decompose"
    assert report["meta"]["metrics"] == ["ecs"]
    entry = report["charts"]["pred"]["c"]
    assert entry["dtw"] is None and entry["rms"] is None and entry["scrm"] is None
    assert entry["decomposition"]["ecs"] == entry["ecs"]


def test_sweep_rows_cover_three_grids():
    gt_corpus, preds = validation_suite()
    cfg = EngineConfig(fixed_clock=True)
    report = sweep_report(gt_corpus, [preds["exact"], preds["shift"]], cfg)
    rows = report["sweep"]
    assert len(rows) == len(THETA_GRID) + len(LAMBDA_GRID) + len(NLS_GRID)
    by_param = {}
    for row in rows:
        by_param.setdefault(row["param"], []).append(row["value"])
    assert by_param["theta"] == list(THETA_GRID)
    assert by_param["lambda"] == list(LAMBDA_GRID)
    assert by_param["nls_threshold"] == list(NLS_GRID)
    for row in rows:
        assert set(row["ecs"]) == {"exact", "shift"}
        assert row["ranking"][0] == "exact"
        assert row["spread"] == max(row["ecs"].values()) - min(row["ecs"].values())
    # Rows that sit at the defaults describe the identical configuration.
    default_rows = [
        row
        for row in rows
        if (row["param"], row["value"])
        in {("theta", 0.01), ("lambda", 1.0), ("nls_threshold", 0.5)}
    ]
    assert len(default_rows) == 3
    assert default_rows[0]["ecs"] == default_rows[1]["ecs"] == default_rows[2]["ecs"]


def test_sweep_single_corpus_has_zero_spread():
    gt_corpus, preds = validation_suite()
    report = sweep_report(gt_corpus, [preds["noise"]], EngineConfig(fixed_clock=True))
    assert all(row["spread"] == 0.0 for row in report["sweep"])
    assert all(row["ranking"] == ["noise"] for row in report["sweep"])


def _agreement_corpora():
    table_a = make_table("c1", {"cases": [1.0, 2.0, 4.0]}, meta={"chart_type": "line"})
    table_b = make_table("c1", {"cases": [1.0, 2.0, 5.0]})
    long_a = make_table("c2", {"cases": [float(k) for k in range(1, 26)]})
    long_b = make_table("c2", {"cases": [float(k) for k in range(1, 26)]})
    a = make_corpus("sysA", [table_a, long_a])
    b = make_corpus("sysB", [table_b, long_b])
    return a, b


def test_agreement_report_scores_and_strata():
    a, b = _agreement_corpora()
    report = agreement_report(a, b, CFG)
    assert report["meta"]["mode"] == "agreement"
    assert report["meta"]["corpora"]["reference"]["name"] == "sysA"
    charts = report["charts"]["sysB"]
    assert charts["c2"]["ecs"] == 1.0
    assert charts["c1"]["series_length"] == "<=20"
    assert charts["c2"]["series_length"] == "21-100"
    summary = report["corpus"]["sysB"]
    assert summary["n_scored"] == 2
    assert summary["ecs_median"] == pytest.approx(
        (charts["c1"]["ecs"] + charts["c2"]["ecs"]) / 2, abs=1e-12
    )
    strata = report["groups"]["sysB"]["series_length"]
    assert strata["<=20"]["n_scored"] == 1
    assert strata["21-100"]["n_scored"] == 1


def test_agreement_candidate_failure_scores_zero():
    a, _ = _agreement_corpora()
    b = make_corpus("sysB", [make_table("c1", {"cases": [1.0, 2.0, 4.0]})])
    b.failures["c2"] = "ragged row"
    report = agreement_report(a, b, CFG)
    charts = report["charts"]["sysB"]
    assert charts["c2"]["ecs"] == 0.0
    assert report["corpus"]["sysB"]["n_scored"] == 2


def test_agreement_reference_failure_excluded():
    a, b = _agreement_corpora()
    del a.charts["c1"]
    a.failures["c1"] = "bad file"
    report = agreement_report(a, b, CFG)
    charts = report["charts"]["sysB"]
    assert charts["c1"]["ecs"] is None
    assert report["corpus"]["sysB"]["n_scored"] == 1
    assert any("excluded" in w for w in report["meta"]["warnings"])


def test_agreement_requires_matching_chart_ids():
    a, b = _agreement_corpora()
    del b.charts["c2"]
    with pytest.raises(MismatchedCorpora):
        agreement_report(a, b, CFG)


def test_agreement_rejects_empty_corpora():
    with pytest.raises(EmptyCorpus):
        agreement_report(Corpus(name="a"), Corpus(name="b"), CFG)


@settings(max_examples=25)
@given(seed=st.integers(0, 10**6))
def test_random_charts_keep_score_identities(seed):
    gt_corpus, pred_corpus = random_corpus_pair(3, seed=seed)
    for chart_id in sorted(gt_corpus.charts):
        outcome = score_chart(
            gt_corpus.charts[chart_id],
            pred_corpus.charts.get(chart_id),
            pred_corpus.failures.get(chart_id),
            CFG,
            pred_corpus.name,
        )
        assert 0.0 <= outcome.ecs <= 1.0
        assert outcome.decomposition.ecs == outcome.ecs
        assert outcome.decomposition.total() == pytest.approx(1.0, abs=1e-9)
        per_series_sum = sum(
            row["ecs"]
            for row in outcome.per_series
            if row["gt_label"] is not None
        )
        n_gt = len(gt_corpus.charts[chart_id].series)
        assert outcome.ecs == per_series_sum / n_gt
