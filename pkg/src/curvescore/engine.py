"""Corpus evaluation engine.

Orchestrates series matching, temporal alignment, key/value baselines,
error decomposition, downstream statistics, hyperparameter sweeps, and
inter-system agreement into deterministic report dictionaries. Reports
always carry the same six top-level keys (meta, charts, corpus, groups,
downstream, sweep); sections a mode does not produce are null.
"""

from __future__ import annotations

import datetime as dt
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .alignment import AlignParams, EmptyInput, dtw_series, ecs_series
from .cells import KVScore, rms_score, scrm_score, scrm_tolerance, table_to_cells
from .decomposition import Decomposition, decompose_chart, mean_decomposition
from .epi_stats import (
    LOG_PSEUDOCOUNT,
    MIN_GROWTH_PHASE,
    SeriesStatRecord,
    build_stat_record,
    correlate_metrics,
)
from .matching import GT_UNMATCHED, PRED_UNMATCHED, match_series
from .tables import ChartTable, Corpus, CorpusError, EmptyCorpus
from .version import __version__

__all__ = [
    "ALL_METRICS",
    "DEFAULT_GROUP_BY",
    "THETA_GRID",
    "LAMBDA_GRID",
    "NLS_GRID",
    "ConfigError",
    "MismatchedCorpora",
    "EngineConfig",
    "ChartOutcome",
    "score_chart",
    "evaluate_corpus",
    "evaluate_report",
    "sweep_report",
    "downstream_report",
    "agreement_report",
]

ALL_METRICS = ("ecs", "dtw", "rms", "scrm")
DEFAULT_GROUP_BY = ("chart_type", "cumulative", "set", "source")

THETA_GRID = (0.001, 0.005, 0.01, 0.02, 0.05, 0.1)
LAMBDA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
NLS_GRID = (0.0, 0.3, 0.5, 0.7, 0.9)

SERIES_LENGTH_STRATA = ((20, "<=20"), (100, "21-100"), (None, ">100"))


class ConfigError(ValueError):
    """Invalid engine configuration (bad parameter, metric, or job count)."""


class MismatchedCorpora(CorpusError):
    """Agreement inputs must cover exactly the same chart ids."""


@dataclass(frozen=True)
class EngineConfig:
    """Validated evaluation settings shared by every mode."""

    theta: float = 0.01
    gap_penalty: float = 1.0
    nls_threshold: float = 0.5
    metrics: tuple[str, ...] = ALL_METRICS
    group_by: tuple[str, ...] = DEFAULT_GROUP_BY
    jobs: int = 1
    fixed_clock: bool = False

    def __post_init__(self) -> None:
        try:
            AlignParams(theta=self.theta, gap_penalty=self.gap_penalty)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 <= self.nls_threshold < 1.0:
            raise ConfigError(
                f"nls_threshold must be in [0, 1), got {self.nls_threshold}"
            )
        metrics = tuple(dict.fromkeys(self.metrics))
        if not metrics:
            raise ConfigError("at least one metric is required")
        unknown = [m for m in metrics if m not in ALL_METRICS]
        if unknown:
            raise ConfigError(
                f"unknown metric(s): {', '.join(sorted(unknown))}; "
                f"choose from {', '.join(ALL_METRICS)}"
            )
        object.__setattr__(
            self, "metrics", tuple(m for m in ALL_METRICS if m in metrics)
        )
        object.__setattr__(self, "group_by", tuple(self.group_by))
        if not isinstance(self.jobs, int) or isinstance(self.jobs, bool) or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs!r}")

    @property
    def align_params(self) -> AlignParams:
        return AlignParams(theta=self.theta, gap_penalty=self.gap_penalty)


@dataclass
class ChartOutcome:
    """Everything computed for one ground-truth chart."""

    chart_id: str
    corpus: str
    tags: dict[str, str]
    per_series: list[dict] = field(default_factory=list)
    ecs: float | None = None
    dtw: float | None = None
    rms: KVScore | None = None
    scrm: KVScore | None = None
    decomposition: Decomposition | None = None
    warnings: list[str] = field(default_factory=list)
    stat_records: list[SeriesStatRecord] = field(default_factory=list)


def score_chart(
    gt_table: ChartTable,
    pred_table: ChartTable | None,
    failure: str | None,
    cfg: EngineConfig,
    corpus_name: str,
) -> ChartOutcome:
    """Score one prediction chart against its ground truth.

    A missing or unusable prediction scores zero everywhere and decomposes
    as pure no-data error. The chart-level alignment score is the mean over
    ground-truth series, unmatched series contributing zero.
    """
    params = cfg.align_params
    want = set(cfg.metrics)
    collect_stats = "ecs" in want and "dtw" in want
    out = ChartOutcome(
        chart_id=gt_table.chart_id, corpus=corpus_name, tags=dict(gt_table.meta)
    )
    if failure is not None:
        out.warnings.append(f"prediction unusable: {failure}")
    n_gt = len(gt_table.series)
    if n_gt == 0:
        raise EmptyCorpus(f"ground-truth chart {gt_table.chart_id!r} has no series")

    pred_empty = pred_table is None or not pred_table.series
    ecs_total = 0.0
    dtw_total = 0.0
    alignments = {}
    matches = []
    if pred_empty:
        if failure is None:
            out.warnings.append(
                "prediction chart missing"
                if pred_table is None
                else "prediction chart has no series"
            )
        for s in gt_table.series:
            out.per_series.append(
                {
                    "gt_label": s.label,
                    "pred_label": None,
                    "nls": 0.0,
                    "ecs": 0.0 if "ecs" in want else None,
                    "dtw": 0.0 if "dtw" in want else None,
                }
            )
    else:
        matches = match_series(
            [s.label for s in gt_table.series],
            [s.label for s in pred_table.series],
            cfg.nls_threshold,
        )
        for m in matches:
            if m.kind == PRED_UNMATCHED:
                out.per_series.append(
                    {
                        "gt_label": None,
                        "pred_label": m.pred_label,
                        "nls": None,
                        "ecs": None,
                        "dtw": None,
                    }
                )
                continue
            if m.kind == GT_UNMATCHED:
                out.per_series.append(
                    {
                        "gt_label": m.gt_label,
                        "pred_label": None,
                        "nls": 0.0,
                        "ecs": 0.0 if "ecs" in want else None,
                        "dtw": 0.0 if "dtw" in want else None,
                    }
                )
                continue
            gt_s = gt_table.series[m.gt_index]
            pred_s = pred_table.series[m.pred_index]
            entry: dict = {
                "gt_label": m.gt_label,
                "pred_label": m.pred_label,
                "nls": m.nls,
            }
            ecs_i = None
            if "ecs" in want:
                ecs_i, align = ecs_series(pred_s, gt_s, params)
                alignments[m.gt_index] = align
                ecs_total += ecs_i
            entry["ecs"] = ecs_i
            dtw_i = None
            if "dtw" in want:
                try:
                    dtw_i = dtw_series(pred_s, gt_s, params)
                except EmptyInput:
                    dtw_i = 0.0
                    out.warnings.append(
                        f"series {m.gt_label!r}: prediction has no present "
                        "values; warping similarity set to 0"
                    )
                dtw_total += dtw_i
            entry["dtw"] = dtw_i
            out.per_series.append(entry)
            if collect_stats:
                out.stat_records.append(
                    build_stat_record(
                        corpus_name,
                        gt_table.chart_id,
                        gt_s,
                        pred_s,
                        ecs_i,
                        dtw_i,
                        gt_table.label_overrides or None,
                    )
                )

    if "ecs" in want:
        out.ecs = ecs_total / n_gt
        out.decomposition = decompose_chart(
            gt_table, pred_table, matches, alignments, params
        )
    if "dtw" in want:
        out.dtw = dtw_total / n_gt
    if "rms" in want or "scrm" in want:
        gt_cells = table_to_cells(gt_table)
        pred_cells = [] if pred_table is None else table_to_cells(pred_table)
        if "rms" in want:
            out.rms = rms_score(pred_cells, gt_cells)
        if "scrm" in want:
            chart_type = gt_table.meta.get("chart_type")
            if chart_type is None:
                out.warnings.append(
                    "chart_type tag missing; strict cell recovery uses the "
                    "line-chart tolerance"
                )
            out.scrm = scrm_score(pred_cells, gt_cells, chart_type)
    return out


def evaluate_corpus(
    gt_corpus: Corpus, pred_corpus: Corpus, cfg: EngineConfig
) -> dict[str, ChartOutcome]:
    """Score every ground-truth chart, optionally across worker threads.

    Charts are processed in sorted id order; with jobs > 1 the same work is
    distributed over threads and collected back in order, so results do not
    depend on the job count.
    """
    if not gt_corpus.charts:
        raise EmptyCorpus(f"ground-truth corpus {gt_corpus.name!r} has no charts")
    ids = sorted(gt_corpus.charts)

    def work(chart_id: str) -> ChartOutcome:
        return score_chart(
            gt_corpus.charts[chart_id],
            pred_corpus.charts.get(chart_id),
            pred_corpus.failures.get(chart_id),
            cfg,
            pred_corpus.name,
        )

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(work, ids))
    else:
        results = [work(chart_id) for chart_id in ids]
    return dict(zip(ids, results))


def _kv_dict(score: KVScore | None) -> dict | None:
    if score is None:
        return None
    return {
        "precision": score.precision,
        "recall": score.recall,
        "f1": score.f1,
        "matched_total": score.matched_total,
        "n_pred": score.n_pred,
        "n_gt": score.n_gt,
    }


def _chart_entry(outcome: ChartOutcome) -> dict:
    return {
        "ecs": outcome.ecs,
        "dtw": outcome.dtw,
        "rms": _kv_dict(outcome.rms),
        "scrm": _kv_dict(outcome.scrm),
        "decomposition": (
            None if outcome.decomposition is None else outcome.decomposition.as_dict()
        ),
        "per_series": outcome.per_series,
        "tags": outcome.tags,
        "warnings": outcome.warnings,
    }


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _summary(outcomes: list[ChartOutcome], want: set[str]) -> dict:
    out: dict = {"n_charts": len(outcomes)}
    out["ecs"] = _mean([o.ecs for o in outcomes]) if "ecs" in want else None
    out["dtw"] = _mean([o.dtw for o in outcomes]) if "dtw" in want else None
    for name in ("rms", "scrm"):
        if name in want:
            scores = [getattr(o, name) for o in outcomes]
            out[name] = {
                "precision": _mean([s.precision for s in scores]),
                "recall": _mean([s.recall for s in scores]),
                "f1": _mean([s.f1 for s in scores]),
            }
        else:
            out[name] = None
    if "ecs" in want:
        out["decomposition"] = mean_decomposition(
            [o.decomposition for o in outcomes]
        ).as_dict()
    else:
        out["decomposition"] = None
    return out


def _group_summaries(
    outcomes: list[ChartOutcome], cfg: EngineConfig
) -> tuple[dict, list[str]]:
    """Per-tag, per-value summaries over a partition of the charts."""
    want = set(cfg.metrics)
    warnings: list[str] = []
    groups: dict = {}
    for tag in cfg.group_by:
        if not any(tag in o.tags for o in outcomes):
            warnings.append(f"unknown group tag {tag!r}: no chart carries it")
            continue
        buckets: dict[str, list[ChartOutcome]] = {}
        for o in outcomes:
            buckets.setdefault(o.tags.get(tag, "unknown"), []).append(o)
        groups[tag] = {
            value: _summary(members, want)
            for value, members in sorted(buckets.items())
        }
    return groups, warnings


def _timestamp(cfg: EngineConfig) -> str:
    if cfg.fixed_clock:
        return "1970-01-01T00:00:00Z"
    return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _corpus_info(corpus: Corpus, gt_ids: set[str] | None = None) -> dict:
    info = {
        "name": corpus.name,
        "n_charts": len(corpus.charts),
        "n_parse_failures": len(corpus.failures),
    }
    if gt_ids is not None:
        covered = set(corpus.charts) | set(corpus.failures)
        info["n_missing"] = len(gt_ids - covered)
    return info


def _conventions() -> dict:
    """Interpretation choices echoed into every report for auditability."""
    return {
        "label_normalization": "casefold, trim, collapse internal whitespace",
        "series_matching": (
            "maximum-total-similarity one-to-one assignment; paired only when "
            "similarity is strictly above the threshold; ties prefer smaller indices"
        ),
        "alignment_tie_break": "match over delete over insert",
        "value_context": "ground-truth present-value extrema",
        "label_mismatch_rule": (
            "an unmatched ground-truth series counts as label_mismatch when "
            "surplus predicted series exist, else missed_series"
        ),
        "peak_index": "smallest index attaining the maximum, over present values",
        "log_pseudocount": LOG_PSEUDOCOUNT,
        "min_growth_phase": MIN_GROWTH_PHASE,
        "value_tolerances": {"bar": scrm_tolerance("bar"), "default": scrm_tolerance(None)},
        "missing_markers": ["", "nan", "na"],
    }


def _meta(
    mode: str,
    cfg: EngineConfig,
    corpora: dict,
    warnings: list[str],
) -> dict:
    return {
        "mode": mode,
        "schema_version": 1,
        "generated_at": _timestamp(cfg),
        "tool": {"name": "curvescore", "version": __version__},
        "params": {
            "theta": cfg.theta,
            "lambda": cfg.gap_penalty,
            "nls_threshold": cfg.nls_threshold,
        },
        "metrics": list(cfg.metrics),
        "group_by": list(cfg.group_by),
        "conventions": _conventions(),
        "corpora": corpora,
        "warnings": warnings,
    }


def _check_prediction_names(pred_corpora: list[Corpus]) -> None:
    names = [c.name for c in pred_corpora]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ConfigError(f"duplicate prediction corpus name(s): {', '.join(dupes)}")
    if not names:
        raise ConfigError("at least one prediction corpus is required")


def _record_dict(rec: SeriesStatRecord) -> dict:
    return {
        "corpus": rec.corpus,
        "chart_id": rec.chart_id,
        "gt_label": rec.gt_label,
        "ecs": rec.ecs,
        "dtw": rec.dtw,
        "stats": dict(rec.stats),
        "filter_flags": dict(rec.filter_flags),
    }


def _base_report(meta: dict) -> dict:
    return {
        "meta": meta,
        "charts": None,
        "corpus": None,
        "groups": None,
        "downstream": None,
        "sweep": None,
    }


def evaluate_report(
    gt_corpus: Corpus,
    pred_corpora: list[Corpus],
    cfg: EngineConfig,
    mode: str = "evaluate",
) -> dict:
    """Full evaluation of one or more prediction corpora.

    mode "decompose" is the same pipeline restricted to the alignment
    metric, so the report centers on the error decomposition.
    """
    if mode == "decompose":
        cfg = replace(cfg, metrics=("ecs",))
    _check_prediction_names(pred_corpora)
    want = set(cfg.metrics)
    gt_ids = set(gt_corpus.charts)
    meta_warnings = list(gt_corpus.warnings)

    charts: dict = {}
    corpus_section: dict = {}
    groups_section: dict = {}
    all_records: dict[str, list[SeriesStatRecord]] = {}
    for pred in pred_corpora:
        meta_warnings.extend(f"corpus {pred.name!r}: {w}" for w in pred.warnings)
        extra = sorted((set(pred.charts) | set(pred.failures)) - gt_ids)
        for chart_id in extra:
            meta_warnings.append(
                f"corpus {pred.name!r}: chart {chart_id!r} has no ground truth"
            )
        outcomes = evaluate_corpus(gt_corpus, pred, cfg)
        ordered = [outcomes[cid] for cid in sorted(outcomes)]
        charts[pred.name] = {o.chart_id: _chart_entry(o) for o in ordered}
        corpus_section[pred.name] = _summary(ordered, want)
        groups, group_warnings = _group_summaries(ordered, cfg)
        groups_section[pred.name] = groups
        meta_warnings.extend(f"corpus {pred.name!r}: {w}" for w in group_warnings)
        all_records[pred.name] = [r for o in ordered for r in o.stat_records]

    downstream = None
    if mode == "downstream":
        pooled = [r for pred in pred_corpora for r in all_records[pred.name]]
        rows, flag_counts, corr_warnings = correlate_metrics(pooled)
        ordered_records = sorted(
            pooled, key=lambda r: (r.chart_id, r.gt_label, r.corpus)
        )
        downstream = {
            "records": [_record_dict(r) for r in ordered_records],
            "correlations": rows,
            "filter_flag_counts": flag_counts,
        }
        meta_warnings.extend(f"downstream: {w}" for w in corr_warnings)

    corpora_meta = {
        "ground_truth": _corpus_info(gt_corpus),
        "predictions": [_corpus_info(p, gt_ids) for p in pred_corpora],
    }
    report = _base_report(_meta(mode, cfg, corpora_meta, meta_warnings))
    report["charts"] = charts
    report["corpus"] = corpus_section
    report["groups"] = groups_section
    report["downstream"] = downstream
    return report


def downstream_report(
    gt_corpus: Corpus, pred_corpora: list[Corpus], cfg: EngineConfig
) -> dict:
    """Downstream statistics and metric/statistic rank correlations."""
    cfg = replace(cfg, metrics=("ecs", "dtw"))
    return evaluate_report(gt_corpus, pred_corpora, cfg, mode="downstream")


_SWEEP_FIELDS = {
    "theta": "theta",
    "lambda": "gap_penalty",
    "nls_threshold": "nls_threshold",
}


def sweep_report(
    gt_corpus: Corpus, pred_corpora: list[Corpus], cfg: EngineConfig
) -> dict:
    """Alignment-score sensitivity over the three hyperparameter grids.

    Each grid varies one parameter with the others at their configured
    values; every row records per-corpus mean scores, their spread, and the
    quality ranking (ties broken by corpus name).
    """
    _check_prediction_names(pred_corpora)
    if not gt_corpus.charts:
        raise EmptyCorpus(f"ground-truth corpus {gt_corpus.name!r} has no charts")
    rows = []
    for param, grid in (
        ("theta", THETA_GRID),
        ("lambda", LAMBDA_GRID),
        ("nls_threshold", NLS_GRID),
    ):
        for value in grid:
            sub_cfg = replace(cfg, metrics=("ecs",), **{_SWEEP_FIELDS[param]: value})
            per_corpus = {}
            for pred in pred_corpora:
                outcomes = evaluate_corpus(gt_corpus, pred, sub_cfg)
                per_corpus[pred.name] = _mean(
                    [outcomes[cid].ecs for cid in sorted(outcomes)]
                )
            ranking = sorted(per_corpus, key=lambda name: (-per_corpus[name], name))
            rows.append(
                {
                    "param": param,
                    "value": value,
                    "ecs": per_corpus,
                    "spread": max(per_corpus.values()) - min(per_corpus.values()),
                    "ranking": ranking,
                }
            )
    gt_ids = set(gt_corpus.charts)
    corpora_meta = {
        "ground_truth": _corpus_info(gt_corpus),
        "predictions": [_corpus_info(p, gt_ids) for p in pred_corpora],
    }
    meta_warnings = list(gt_corpus.warnings)
    report = _base_report(_meta("sweep", cfg, corpora_meta, meta_warnings))
    report["sweep"] = rows
    return report


def _usable_reference(table: ChartTable) -> ChartTable:
    """Copy of a reference chart keeping only series with present values."""
    kept = [s for s in table.series if s.present_values()]
    return ChartTable(
        chart_id=table.chart_id,
        series=kept,
        meta=dict(table.meta),
        x_name=table.x_name,
    )


def _series_length_stratum(table: ChartTable) -> str:
    longest = max((len(s.present_values()) for s in table.series), default=0)
    for bound, label in SERIES_LENGTH_STRATA:
        if bound is None or longest <= bound:
            return label
    raise AssertionError("unreachable")


def _agreement_summary(values: list[float]) -> dict:
    if not values:
        return {"n_scored": 0, "ecs_mean": None, "ecs_median": None}
    return {
        "n_scored": len(values),
        "ecs_mean": _mean(values),
        "ecs_median": float(statistics.median(values)),
    }


def agreement_report(
    corpus_a: Corpus, corpus_b: Corpus, cfg: EngineConfig
) -> dict:
    """Inter-system agreement: corpus A is the reference side.

    Both corpora must cover exactly the same chart ids. Charts where either
    side is unusable get a null score with a warning and are excluded from
    the aggregate statistics.
    """
    ids_a = set(corpus_a.charts) | set(corpus_a.failures)
    ids_b = set(corpus_b.charts) | set(corpus_b.failures)
    if ids_a != ids_b:
        only_a = sorted(ids_a - ids_b)[:5]
        only_b = sorted(ids_b - ids_a)[:5]
        raise MismatchedCorpora(
            "agreement corpora cover different chart ids "
            f"(only in {corpus_a.name!r}: {only_a}; only in {corpus_b.name!r}: {only_b})"
        )
    if not ids_a:
        raise EmptyCorpus("agreement corpora have no charts")
    cfg = replace(cfg, metrics=("ecs",))

    chart_entries: dict[str, dict] = {}
    scored: list[tuple[str, float, str, dict[str, str]]] = []
    meta_warnings: list[str] = []
    for chart_id in sorted(ids_a):
        a_table = corpus_a.charts.get(chart_id)
        b_table = corpus_b.charts.get(chart_id)
        entry: dict = {"ecs": None, "series_length": None, "per_series": [], "warnings": []}
        if a_table is None:
            entry["warnings"].append(
                f"reference unusable: {corpus_a.failures[chart_id]}"
            )
        else:
            usable = _usable_reference(a_table)
            entry["series_length"] = _series_length_stratum(usable)
            if not usable.series:
                entry["warnings"].append("reference chart has no usable series")
            else:
                outcome = score_chart(
                    usable,
                    b_table,
                    corpus_b.failures.get(chart_id),
                    cfg,
                    corpus_b.name,
                )
                entry["ecs"] = outcome.ecs
                entry["per_series"] = [
                    {k: row[k] for k in ("gt_label", "pred_label", "nls", "ecs")}
                    for row in outcome.per_series
                ]
                entry["warnings"].extend(outcome.warnings)
                scored.append(
                    (chart_id, outcome.ecs, entry["series_length"], dict(a_table.meta))
                )
        if entry["ecs"] is None:
            meta_warnings.append(
                f"chart {chart_id!r} excluded from agreement statistics"
            )
        chart_entries[chart_id] = entry

    overall = _agreement_summary([ecs for _, ecs, _, _ in scored])
    overall["n_charts"] = len(chart_entries)

    groups: dict = {}
    length_buckets: dict[str, list[float]] = {}
    for _, ecs, stratum, _ in scored:
        length_buckets.setdefault(stratum, []).append(ecs)
    stratum_order = [label for _, label in SERIES_LENGTH_STRATA]
    groups["series_length"] = {
        label: _agreement_summary(length_buckets[label])
        for label in stratum_order
        if label in length_buckets
    }
    for tag in cfg.group_by:
        if not any(tag in tags for _, _, _, tags in scored):
            continue
        buckets: dict[str, list[float]] = {}
        for _, ecs, _, tags in scored:
            buckets.setdefault(tags.get(tag, "unknown"), []).append(ecs)
        groups[tag] = {
            value: _agreement_summary(members)
            for value, members in sorted(buckets.items())
        }

    corpora_meta = {
        "reference": _corpus_info(corpus_a),
        "candidate": _corpus_info(corpus_b),
    }
    report = _base_report(_meta("agreement", cfg, corpora_meta, meta_warnings))
    report["charts"] = {corpus_b.name: chart_entries}
    report["corpus"] = {corpus_b.name: overall}
    report["groups"] = {corpus_b.name: groups}
    return report
