"""Report serialization: canonical JSON and flat CSV exports.

The JSON form is the contract: stable key order (insertion order fixed by
the engine), two-space indent, NaN rejected, trailing newline. The CSV
exports flatten the per-chart, per-group, downstream, correlation, and
sweep sections for spreadsheet use; cells hold flat text only.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .decomposition import COMPONENT_FIELDS
from .epi_stats import STATISTICS

__all__ = [
    "report_json",
    "write_report",
    "meta_csv",
    "charts_csv",
    "corpus_csv",
    "groups_csv",
    "downstream_csv",
    "correlations_csv",
    "sweep_csv",
    "write_csv_exports",
]

_TAG_COLUMNS = ("chart_type", "cumulative", "set", "source")


def _mode(report: dict) -> str:
    return (report.get("meta") or {}).get("mode", "evaluate")


def report_json(report: dict) -> str:
    """Canonical JSON text for a report."""
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(report_json(report), encoding="utf-8")
    return path


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _writer() -> tuple[io.StringIO, csv.writer]:
    buf = io.StringIO()
    return buf, csv.writer(buf, lineterminator="\n")


def _flatten(value, prefix: str, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten(sub, f"{prefix}.{key}" if prefix else str(key), rows)
    elif isinstance(value, list):
        if all(not isinstance(item, (dict, list)) for item in value):
            rows.append((prefix, "; ".join(_cell(item) for item in value)))
        else:
            for index, item in enumerate(value):
                _flatten(item, f"{prefix}.{index}", rows)
    else:
        rows.append((prefix, _cell(value)))


def meta_csv(report: dict) -> str:
    """Run metadata as flat key/value rows (nested keys joined by dots)."""
    buf, w = _writer()
    w.writerow(["key", "value"])
    rows: list[tuple[str, str]] = []
    _flatten(report.get("meta") or {}, "", rows)
    for key, value in rows:
        w.writerow([key, value])
    return buf.getvalue()


def charts_csv(report: dict) -> str:
    """One row per (prediction corpus, chart)."""
    buf, w = _writer()
    if _mode(report) == "agreement":
        w.writerow(["corpus", "chart_id", "series_length", "ecs", "n_warnings"])
        for corpus_name, chart_map in (report.get("charts") or {}).items():
            for chart_id, entry in chart_map.items():
                w.writerow(
                    [
                        corpus_name,
                        chart_id,
                        _cell(entry.get("series_length")),
                        _cell(entry.get("ecs")),
                        str(len(entry.get("warnings") or [])),
                    ]
                )
        return buf.getvalue()
    header = (
        ["corpus", "chart_id"]
        + list(_TAG_COLUMNS)
        + ["ecs", "dtw"]
        + [f"rms_{p}" for p in ("precision", "recall", "f1")]
        + [f"scrm_{p}" for p in ("precision", "recall", "f1")]
        + [f"decomposition_{name}" for name in COMPONENT_FIELDS]
        + ["n_warnings"]
    )
    w.writerow(header)
    for corpus_name, chart_map in (report.get("charts") or {}).items():
        for chart_id, entry in chart_map.items():
            tags = entry.get("tags") or {}
            row = [corpus_name, chart_id]
            row += [_cell(tags.get(t)) for t in _TAG_COLUMNS]
            row += [_cell(entry.get("ecs")), _cell(entry.get("dtw"))]
            for name in ("rms", "scrm"):
                kv = entry.get(name)
                row += [
                    _cell(None if kv is None else kv[p])
                    for p in ("precision", "recall", "f1")
                ]
            decomp = entry.get("decomposition")
            row += [
                _cell(None if decomp is None else decomp[name])
                for name in COMPONENT_FIELDS
            ]
            row.append(str(len(entry.get("warnings") or [])))
            w.writerow(row)
    return buf.getvalue()


def corpus_csv(report: dict) -> str:
    """One row per prediction corpus (or candidate corpus in agreement mode)."""
    buf, w = _writer()
    if _mode(report) == "agreement":
        w.writerow(["corpus", "n_charts", "n_scored", "ecs_mean", "ecs_median"])
        for corpus_name, summary in (report.get("corpus") or {}).items():
            w.writerow(
                [
                    corpus_name,
                    _cell(summary.get("n_charts")),
                    _cell(summary.get("n_scored")),
                    _cell(summary.get("ecs_mean")),
                    _cell(summary.get("ecs_median")),
                ]
            )
        return buf.getvalue()
    header = (
        ["corpus", "n_charts", "ecs", "dtw"]
        + [f"rms_{p}" for p in ("precision", "recall", "f1")]
        + [f"scrm_{p}" for p in ("precision", "recall", "f1")]
        + [f"decomposition_{name}" for name in COMPONENT_FIELDS]
    )
    w.writerow(header)
    for corpus_name, summary in (report.get("corpus") or {}).items():
        row = [corpus_name, _cell(summary.get("n_charts"))]
        row += [_cell(summary.get("ecs")), _cell(summary.get("dtw"))]
        for name in ("rms", "scrm"):
            kv = summary.get(name)
            row += [
                _cell(None if kv is None else kv[p])
                for p in ("precision", "recall", "f1")
            ]
        decomp = summary.get("decomposition")
        row += [
            _cell(None if decomp is None else decomp[name])
            for name in COMPONENT_FIELDS
        ]
        w.writerow(row)
    return buf.getvalue()


def groups_csv(report: dict) -> str:
    """One row per (prediction corpus, tag, value) summary."""
    buf, w = _writer()
    if _mode(report) == "agreement":
        w.writerow(["corpus", "tag", "value", "n_scored", "ecs_mean", "ecs_median"])
        for corpus_name, tag_map in (report.get("groups") or {}).items():
            for tag, value_map in tag_map.items():
                for value, summary in value_map.items():
                    w.writerow(
                        [
                            corpus_name,
                            tag,
                            value,
                            _cell(summary.get("n_scored")),
                            _cell(summary.get("ecs_mean")),
                            _cell(summary.get("ecs_median")),
                        ]
                    )
        return buf.getvalue()
    header = (
        ["corpus", "tag", "value", "n_charts", "ecs", "dtw", "rms_f1", "scrm_f1"]
        + [f"decomposition_{name}" for name in COMPONENT_FIELDS]
    )
    w.writerow(header)
    for corpus_name, tag_map in (report.get("groups") or {}).items():
        for tag, value_map in tag_map.items():
            for value, summary in value_map.items():
                row = [corpus_name, tag, value, _cell(summary.get("n_charts"))]
                row += [_cell(summary.get("ecs")), _cell(summary.get("dtw"))]
                for name in ("rms", "scrm"):
                    kv = summary.get(name)
                    row.append(_cell(None if kv is None else kv["f1"]))
                decomp = summary.get("decomposition")
                row += [
                    _cell(None if decomp is None else decomp[name])
                    for name in COMPONENT_FIELDS
                ]
                w.writerow(row)
    return buf.getvalue()


def downstream_csv(report: dict) -> str:
    """One row per matched-series downstream record (pooled corpora)."""
    buf, w = _writer()
    header = ["corpus", "chart_id", "gt_label", "ecs", "dtw"]
    for name in STATISTICS:
        header += [name, f"{name}_flag"]
    w.writerow(header)
    section = report.get("downstream") or {}
    for rec in section.get("records", []):
        row = [
            rec["corpus"],
            rec["chart_id"],
            rec["gt_label"],
            _cell(rec["ecs"]),
            _cell(rec["dtw"]),
        ]
        for name in STATISTICS:
            row.append(_cell(rec["stats"].get(name)))
            row.append(_cell(rec["filter_flags"].get(name)))
        w.writerow(row)
    return buf.getvalue()


def correlations_csv(report: dict) -> str:
    """One row per statistic in the pooled correlation table."""
    buf, w = _writer()
    w.writerow(["statistic", "n", "r_ecs", "r_dtw"])
    section = report.get("downstream") or {}
    for row in section.get("correlations", []):
        w.writerow(
            [
                row["statistic"],
                _cell(row["n"]),
                _cell(row["r_ecs"]),
                _cell(row["r_dtw"]),
            ]
        )
    return buf.getvalue()


def sweep_csv(report: dict) -> str:
    """One row per (grid point, prediction corpus)."""
    buf, w = _writer()
    w.writerow(["param", "value", "corpus", "ecs", "rank", "spread"])
    for row in report.get("sweep") or []:
        ranking = row["ranking"]
        for corpus_name in ranking:
            w.writerow(
                [
                    row["param"],
                    _cell(row["value"]),
                    corpus_name,
                    _cell(row["ecs"][corpus_name]),
                    str(ranking.index(corpus_name) + 1),
                    _cell(row["spread"]),
                ]
            )
    return buf.getvalue()


_EXPORTS = (
    ("meta.csv", meta_csv, "meta"),
    ("charts.csv", charts_csv, "charts"),
    ("corpus.csv", corpus_csv, "corpus"),
    ("groups.csv", groups_csv, "groups"),
    ("downstream.csv", downstream_csv, "downstream"),
    ("downstream_correlations.csv", correlations_csv, "downstream"),
    ("sweep.csv", sweep_csv, "sweep"),
)


def write_csv_exports(report: dict, directory: str | Path) -> list[Path]:
    """Write one CSV per report section that is present (plus the pooled
    correlation table, which accompanies the downstream section)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for filename, builder, section in _EXPORTS:
        if report.get(section) is None:
            continue
        path = directory / filename
        path.write_text(builder(report), encoding="utf-8")
        written.append(path)
    return written
