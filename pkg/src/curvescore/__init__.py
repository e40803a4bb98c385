"""curvescore: corpus-scale scoring of time-series data extracted from charts.

Core ideas: a temporally-aware alignment score for extracted series (edit
alignment with a gap penalty and a relative value tolerance), classic
key/value and warping baselines for comparison, a seven-way decomposition
of chart-level error, downstream epidemiological statistics, and a
deterministic reporting engine behind both a Python API and an HTTP
service with a thin CLI client.
"""

from .alignment import (
    AlignmentError,
    AlignmentResult,
    AlignParams,
    DtwResult,
    EmptyGroundTruth,
    EmptyInput,
    ValueContext,
    context_from_values,
    dtw_align,
    dtw_series,
    ecs_from_alignment,
    ecs_series,
    erp_align,
    substitution_cost,
)
from .cells import (
    CellEntry,
    KVScore,
    rms_score,
    scrm_score,
    scrm_tolerance,
    table_to_cells,
)
from .decomposition import (
    COMPONENT_FIELDS,
    Decomposition,
    decompose_chart,
    mean_decomposition,
)
from .engine import (
    ALL_METRICS,
    DEFAULT_GROUP_BY,
    ChartOutcome,
    ConfigError,
    EngineConfig,
    MismatchedCorpora,
    agreement_report,
    downstream_report,
    evaluate_corpus,
    evaluate_report,
    score_chart,
    sweep_report,
)
from .epi_stats import (
    STATISTICS,
    DegenerateInput,
    SeriesStatRecord,
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
from .matching import SeriesMatch, match_series, nls, normalize_label
from .reporting import report_json, write_csv_exports, write_report
from .tables import (
    ChartTable,
    Corpus,
    CorpusError,
    DuplicateChartId,
    EmptyCorpus,
    EmptyTable,
    GroundTruthParseFailure,
    MalformedHeader,
    NonNumericCell,
    RaggedRow,
    TableError,
    TimeSeries,
    apply_metadata,
    corpus_from_texts,
    load_corpus,
    load_metadata,
    load_metadata_file,
    parse_table,
    serialize_table,
)
from .version import __version__

__all__ = [
    "__version__",
    # tables
    "ChartTable",
    "Corpus",
    "CorpusError",
    "DuplicateChartId",
    "EmptyCorpus",
    "EmptyTable",
    "GroundTruthParseFailure",
    "MalformedHeader",
    "NonNumericCell",
    "RaggedRow",
    "TableError",
    "TimeSeries",
    "apply_metadata",
    "corpus_from_texts",
    "load_corpus",
    "load_metadata",
    "load_metadata_file",
    "parse_table",
    "serialize_table",
    # matching
    "SeriesMatch",
    "match_series",
    "nls",
    "normalize_label",
    # alignment
    "AlignmentError",
    "AlignmentResult",
    "AlignParams",
    "DtwResult",
    "EmptyGroundTruth",
    "EmptyInput",
    "ValueContext",
    "context_from_values",
    "dtw_align",
    "dtw_series",
    "ecs_from_alignment",
    "ecs_series",
    "erp_align",
    "substitution_cost",
    # cells
    "CellEntry",
    "KVScore",
    "rms_score",
    "scrm_score",
    "scrm_tolerance",
    "table_to_cells",
    # decomposition
    "COMPONENT_FIELDS",
    "Decomposition",
    "decompose_chart",
    "mean_decomposition",
    # statistics
    "STATISTICS",
    "DegenerateInput",
    "SeriesStatRecord",
    "build_stat_record",
    "classify_label",
    "correlate_metrics",
    "growth_rate_fidelity",
    "peak_magnitude_error",
    "peak_timing_error",
    "pearson",
    "spearman",
    "total_count_error",
    # engine
    "ALL_METRICS",
    "DEFAULT_GROUP_BY",
    "ChartOutcome",
    "ConfigError",
    "EngineConfig",
    "MismatchedCorpora",
    "agreement_report",
    "downstream_report",
    "evaluate_corpus",
    "evaluate_report",
    "score_chart",
    "sweep_report",
    # reporting
    "report_json",
    "write_csv_exports",
    "write_report",
]
