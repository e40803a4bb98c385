"""Tabular time-series data model: parsing, serialization, corpus loading.

A chart is a table whose first column holds x-axis labels (dates, weeks) and
whose remaining columns are named series of numeric values. Cells are real
numbers or missing; "nan", "na" and the empty string (case-insensitive) mark
missing values, thousands separators are stripped, and a trailing percent
sign is dropped with the numeric value kept.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "TableError",
    "MalformedHeader",
    "NonNumericCell",
    "RaggedRow",
    "EmptyTable",
    "CorpusError",
    "GroundTruthParseFailure",
    "DuplicateChartId",
    "EmptyCorpus",
    "TimeSeries",
    "ChartTable",
    "Corpus",
    "parse_table",
    "serialize_table",
    "corpus_from_texts",
    "load_corpus",
    "load_metadata",
]

MISSING_MARKERS = frozenset({"", "nan", "na"})

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

_DELIMS = {"tsv": "\t", "csv": ","}


class TableError(ValueError):
    """Base class for table parsing errors."""


class MalformedHeader(TableError):
    """Header row is unusable: empty cell, or no series columns."""


class NonNumericCell(TableError):
    """A data cell is neither numeric nor a missing marker."""

    def __init__(self, row: int, col: int, text: str):
        self.row = row
        self.col = col
        self.text = text
        super().__init__(f"non-numeric cell at row {row}, column {col}: {text!r}")


class RaggedRow(TableError):
    """A data row has more cells than the header."""

    def __init__(self, row: int, width: int, header_width: int):
        self.row = row
        super().__init__(
            f"row {row} has {width} cells but the header has {header_width}"
        )


class EmptyTable(TableError):
    """No data rows below the header."""


class CorpusError(ValueError):
    """Base class for corpus-level loading errors."""


class GroundTruthParseFailure(CorpusError):
    """A ground-truth chart failed to parse or validate; the run must abort."""

    def __init__(self, chart_id: str, reason: str):
        self.chart_id = chart_id
        self.reason = reason
        super().__init__(f"ground-truth chart {chart_id!r}: {reason}")


class DuplicateChartId(CorpusError):
    """Two files in one corpus directory map to the same chart id."""


class EmptyCorpus(CorpusError):
    """The ground-truth directory contains no chart files."""


@dataclass
class TimeSeries:
    """One named column: (x_label, value) points in row order."""

    label: str
    points: list[tuple[str, float | None]] = field(default_factory=list)

    def present_values(self) -> list[float]:
        """Values with missing entries dropped, in row order."""
        return [v for _, v in self.points if v is not None]

    def x_labels(self) -> list[str]:
        return [x for x, _ in self.points]


@dataclass
class ChartTable:
    """A parsed chart: ordered series sharing one x-axis column."""

    chart_id: str
    series: list[TimeSeries] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)
    x_name: str = "x"
    warnings: list[str] = field(default_factory=list)
    label_overrides: dict[str, str] = field(default_factory=dict)

    def labels(self) -> list[str]:
        return [s.label for s in self.series]

    def n_rows(self) -> int:
        return len(self.series[0].points) if self.series else 0


@dataclass
class Corpus:
    """A named set of charts keyed by chart id, plus recorded load failures."""

    name: str
    charts: dict[str, ChartTable] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def chart_ids(self) -> list[str]:
        return sorted(set(self.charts) | set(self.failures))


def _parse_value(text: str, row: int, col: int) -> float | None:
    cell = text.strip()
    if cell.lower() in MISSING_MARKERS:
        return None
    body = cell[:-1].strip() if cell.endswith("%") else cell
    body = body.replace(",", "")
    if not _NUMBER_RE.match(body):
        raise NonNumericCell(row, col, text)
    value = float(body)
    if value != value or value in (float("inf"), float("-inf")):
        raise NonNumericCell(row, col, text)
    return value


def _split_rows(text: str, fmt: str) -> list[list[str]]:
    if text.startswith("﻿"):
        text = text[1:]
    if fmt == "csv":
        return [row for row in csv.reader(io.StringIO(text)) if any(c.strip() for c in row)]
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rows.append(line.split("\t"))
    return rows


def parse_table(text: str, chart_id: str, fmt: str = "tsv") -> ChartTable:
    """Parse one chart table from TSV or CSV text.

    The first row is the header (x-axis name, then series labels); every
    later row is one x position. Short rows are padded with missing values
    and a warning is recorded; rows wider than the header raise RaggedRow.
    """
    if fmt not in _DELIMS:
        raise ValueError(f"unknown format {fmt!r}")
    rows = _split_rows(text, fmt)
    if not rows:
        raise EmptyTable(f"chart {chart_id!r} is empty")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2:
        raise MalformedHeader(f"chart {chart_id!r}: header has no series columns")
    if any(not c for c in header):
        raise MalformedHeader(f"chart {chart_id!r}: empty header cell")
    data_rows = rows[1:]
    if not data_rows:
        raise EmptyTable(f"chart {chart_id!r} has a header but no data rows")

    table = ChartTable(chart_id=chart_id, x_name=header[0])
    table.series = [TimeSeries(label=lab) for lab in header[1:]]
    width = len(header)
    for r, cells in enumerate(data_rows, start=1):
        if len(cells) > width:
            raise RaggedRow(r, len(cells), width)
        if len(cells) < width:
            table.warnings.append(
                f"row {r}: padded {width - len(cells)} missing cell(s)"
            )
            cells = cells + [""] * (width - len(cells))
        x_label = cells[0].strip()
        for c, cell in enumerate(cells[1:], start=1):
            table.series[c - 1].points.append((x_label, _parse_value(cell, r, c)))
    return table


def _format_value(value: float | None) -> str:
    if value is None:
        return "nan"
    return repr(value)


def serialize_table(table: ChartTable, fmt: str = "tsv") -> str:
    """Render a ChartTable back to TSV/CSV text (missing values as "nan")."""
    if fmt not in _DELIMS:
        raise ValueError(f"unknown format {fmt!r}")
    header = [table.x_name] + table.labels()
    n_rows = table.n_rows()
    body_rows = []
    for r in range(n_rows):
        x_label = table.series[0].points[r][0]
        body_rows.append(
            [x_label] + [_format_value(s.points[r][1]) for s in table.series]
        )
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body_rows)
        return buf.getvalue()
    delim = _DELIMS[fmt]
    for row in [header] + body_rows:
        for cell in row:
            if "\t" in cell or "\n" in cell or "\r" in cell:
                raise ValueError(f"cell {cell!r} cannot be written as TSV")
    lines = [delim.join(row) for row in [header] + body_rows]
    return "\n".join(lines) + "\n"


def _validate_ground_truth(table: ChartTable) -> None:
    for s in table.series:
        if not s.present_values():
            raise GroundTruthParseFailure(
                table.chart_id, f"series {s.label!r} has no present values"
            )


def corpus_from_texts(
    name: str,
    files: dict[str, str],
    fmt: str = "tsv",
    role: str = "prediction",
) -> Corpus:
    """Assemble a corpus from {file name: file text}.

    The chart id is the file basename without its extension. In the
    ground_truth role any parse or validation failure aborts the load; in the
    prediction role failures are recorded so those charts score as extracting
    no data.
    """
    if not files:
        raise EmptyCorpus(f"corpus {name!r} has no chart files")
    corpus = Corpus(name=name)
    for fname in sorted(files):
        chart_id = Path(fname).stem
        if chart_id in corpus.charts or chart_id in corpus.failures:
            raise DuplicateChartId(f"corpus {name!r}: duplicate chart id {chart_id!r}")
        try:
            table = parse_table(files[fname], chart_id, fmt)
            if role == "ground_truth":
                _validate_ground_truth(table)
        except GroundTruthParseFailure:
            raise
        except (TableError, ValueError) as exc:
            if role == "ground_truth":
                raise GroundTruthParseFailure(chart_id, str(exc)) from exc
            corpus.failures[chart_id] = str(exc)
            continue
        corpus.charts[chart_id] = table
    return corpus


def load_corpus(
    directory: str | Path,
    fmt: str = "tsv",
    role: str = "prediction",
    name: str | None = None,
) -> Corpus:
    """Load every <fmt> file in a directory as one corpus.

    File enumeration is sorted, so results are independent of file-system
    iteration order.
    """
    directory = Path(directory)
    if not directory.is_dir():
        if role == "ground_truth":
            raise EmptyCorpus(f"ground-truth directory {directory} does not exist")
        raise CorpusError(f"directory {directory} does not exist")
    ext = "." + fmt
    files: dict[str, str] = {}
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() != ext:
            continue
        try:
            files[path.name] = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            if role == "ground_truth":
                raise GroundTruthParseFailure(path.stem, f"not valid UTF-8: {exc}")
            files[path.name] = ""  # parses as EmptyTable -> recorded failure
    if not files:
        raise EmptyCorpus(f"directory {directory} has no {ext} files")
    return corpus_from_texts(
        name if name is not None else directory.name, files, fmt, role
    )


def read_dir_texts(directory: str | Path, fmt: str = "tsv") -> dict[str, str]:
    """Read every <fmt> file in a directory as raw text, keyed by file name.

    Decoding failures map to empty text so the table parser reports them as
    chart-level failures; only a missing directory raises here.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"directory {directory} does not exist")
    ext = "." + fmt
    files: dict[str, str] = {}
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() != ext:
            continue
        try:
            files[path.name] = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            files[path.name] = ""
    return files


_STANDARD_TAGS = ("chart_type", "cumulative", "set", "source")


def load_metadata(text: str, fmt: str) -> dict[str, dict]:
    """Parse a metadata sidecar mapping chart ids to strata tags.

    JSON form: {chart_id: {chart_type, cumulative, set, source,
    label_class_overrides}}. CSV form: a chart_id column plus one column per
    tag (flat text only). Returns {chart_id: {"tags": {...}, "overrides":
    {...}}}.
    """
    out: dict[str, dict] = {}
    if fmt == "json":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("metadata JSON must be an object keyed by chart id")
        for chart_id, entry in raw.items():
            if not isinstance(entry, dict):
                raise ValueError(f"metadata for {chart_id!r} must be an object")
            tags = {
                k: str(v)
                for k, v in entry.items()
                if k != "label_class_overrides" and v is not None
            }
            overrides = entry.get("label_class_overrides") or {}
            if not isinstance(overrides, dict):
                raise ValueError(
                    f"label_class_overrides for {chart_id!r} must be an object"
                )
            out[chart_id] = {
                "tags": tags,
                "overrides": {str(k): str(v) for k, v in overrides.items()},
            }
        return out
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            return out
        header = [c.strip() for c in rows[0]]
        if "chart_id" not in header:
            raise ValueError("metadata CSV needs a chart_id column")
        idx = header.index("chart_id")
        for cells in rows[1:]:
            if not any(c.strip() for c in cells):
                continue
            chart_id = cells[idx].strip()
            tags = {
                header[i]: cells[i].strip()
                for i in range(len(header))
                if i != idx and i < len(cells) and cells[i].strip()
            }
            out[chart_id] = {"tags": tags, "overrides": {}}
        return out
    raise ValueError(f"unknown metadata format {fmt!r}")


def load_metadata_file(path: str | Path) -> dict[str, dict]:
    """Load a sidecar file, inferring JSON vs CSV from the extension."""
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "csv"
    return load_metadata(path.read_text(encoding="utf-8"), fmt)


def apply_metadata(corpus: Corpus, meta_map: dict[str, dict]) -> list[str]:
    """Attach sidecar tags and label-class overrides to a corpus's charts.

    Returns warnings for sidecar entries whose chart id is not in the
    corpus; those entries are ignored.
    """
    warnings: list[str] = []
    for chart_id in sorted(meta_map):
        table = corpus.charts.get(chart_id)
        if table is None:
            warnings.append(f"metadata for unknown chart {chart_id!r} ignored")
            continue
        entry = meta_map[chart_id]
        table.meta.update(entry.get("tags", {}))
        table.label_overrides.update(entry.get("overrides", {}))
    return warnings
