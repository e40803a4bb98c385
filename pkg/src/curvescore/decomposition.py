"""Additive decomposition of a chart's score mass into seven error classes.

Each ground-truth series owns weight 1/G of the chart. A paired series
splits its weight along its alignment path: the achieved score, partial
numerical error on matched points, gap charges for surplus predicted points
and missed ground-truth points. An unmatched ground-truth series charges
label_mismatch when some prediction series went unpaired (the labels failed
to match up) and missed_series when the prediction simply has nothing left.
A chart whose prediction is absent, unparseable, or empty of series charges
everything to no_data_extracted. The seven fields always sum to the chart's
full unit weight.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .alignment import AlignmentResult, AlignParams, ecs_from_alignment
from .matching import GT_UNMATCHED, PAIRED, PRED_UNMATCHED, SeriesMatch

__all__ = [
    "MissingAlignment",
    "Decomposition",
    "COMPONENT_FIELDS",
    "decompose_chart",
    "mean_decomposition",
    "aggregate_decompositions",
]


class MissingAlignment(ValueError):
    """A paired series has no alignment result to decompose."""


@dataclass(frozen=True)
class Decomposition:
    ecs: float = 0.0
    numerical_error: float = 0.0
    surplus_datapoints: float = 0.0
    missed_datapoints: float = 0.0
    label_mismatch: float = 0.0
    missed_series: float = 0.0
    no_data_extracted: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def total(self) -> float:
        return sum(self.as_dict().values())


COMPONENT_FIELDS = tuple(f.name for f in fields(Decomposition))


def decompose_chart(
    gt_table,
    pred_table,
    matches: list[SeriesMatch],
    alignments: dict[int, AlignmentResult],
    params: AlignParams,
) -> Decomposition:
    """Split one chart's unit weight across the seven error classes.

    pred_table is None when the prediction is missing or failed to parse;
    alignments maps ground-truth series index to that pairing's alignment.

    Every component is nonnegative and the seven sum to one. For an aligned
    series the error classes normally split cost/path_length; when a gap
    penalty above 1 pushes the cost past the path length the score clamps
    to zero, and the error classes instead share the whole unit mass in
    proportion to the cost each contributed.
    """
    n_gt = len(gt_table.series)
    if n_gt == 0:
        raise ValueError(f"chart {gt_table.chart_id!r} has no ground-truth series")
    if pred_table is None or not pred_table.series:
        return Decomposition(no_data_extracted=1.0)

    any_pred_unpaired = any(m.kind == PRED_UNMATCHED for m in matches)
    ecs_sum = 0.0
    numerical_sum = 0.0
    surplus_sum = 0.0
    missed_sum = 0.0
    label_mismatch_sum = 0.0
    missed_series_sum = 0.0
    lam = params.gap_penalty
    for m in matches:
        if m.kind == PRED_UNMATCHED:
            continue
        if m.kind == GT_UNMATCHED:
            if any_pred_unpaired:
                label_mismatch_sum += 1.0
            else:
                missed_series_sum += 1.0
            continue
        if m.kind != PAIRED:
            raise ValueError(f"unknown match kind {m.kind!r}")
        if m.gt_index not in alignments:
            raise MissingAlignment(
                f"no alignment for paired ground-truth series {m.gt_label!r}"
            )
        align = alignments[m.gt_index]
        ecs_sum += ecs_from_alignment(align)
        length = align.path_length
        if length == 0:
            continue  # both sides empty: perfect score, no error mass
        denom = float(length) if align.cost <= length else align.cost
        numerical_sum += align.sub_cost_total / denom
        surplus_sum += lam * align.n_insert / denom
        missed_sum += lam * align.n_delete / denom
    return Decomposition(
        ecs=ecs_sum / n_gt,
        numerical_error=numerical_sum / n_gt,
        surplus_datapoints=surplus_sum / n_gt,
        missed_datapoints=missed_sum / n_gt,
        label_mismatch=label_mismatch_sum / n_gt,
        missed_series=missed_series_sum / n_gt,
        no_data_extracted=0.0,
    )


def mean_decomposition(items: list[Decomposition]) -> Decomposition:
    """Field-wise unweighted mean."""
    if not items:
        return Decomposition()
    n = len(items)
    sums = {name: 0.0 for name in COMPONENT_FIELDS}
    for d in items:
        for name in COMPONENT_FIELDS:
            sums[name] += getattr(d, name)
    return Decomposition(**{name: sums[name] / n for name in COMPONENT_FIELDS})


def aggregate_decompositions(
    items: list[tuple[Decomposition, dict[str, str]]],
    group_tags: list[str],
) -> tuple[dict[str, dict[str, tuple[Decomposition, int]]], list[str]]:
    """Group per-chart decompositions by strata tags and average each group.

    Each item carries its chart's tag map. A requested tag that appears on
    no chart is skipped with a warning; charts lacking a tag that others
    have fall into an "unknown" group so every group partition covers all
    charts.
    """
    warnings: list[str] = []
    out: dict[str, dict[str, tuple[Decomposition, int]]] = {}
    for tag in group_tags:
        if not any(tag in tags for _, tags in items):
            warnings.append(f"unknown group tag {tag!r}: no chart carries it")
            continue
        buckets: dict[str, list[Decomposition]] = {}
        for decomp, tags in items:
            value = tags.get(tag, "unknown")
            buckets.setdefault(value, []).append(decomp)
        out[tag] = {
            value: (mean_decomposition(group), len(group))
            for value, group in sorted(buckets.items())
        }
    return out, warnings
