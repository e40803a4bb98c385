"""Series label matching: normalized Levenshtein similarity and assignment.

Labels are normalized (Unicode casefold, trim, whitespace collapse) before
comparison. Two label lists are matched one-to-one by maximizing the total
similarity over pairs whose similarity strictly exceeds a threshold; among
equally good assignments, earlier ground-truth series take the smallest
admissible prediction index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "normalize_label",
    "levenshtein",
    "nls",
    "SeriesMatch",
    "match_series",
]

PAIRED = "paired"
GT_UNMATCHED = "gt_unmatched"
PRED_UNMATCHED = "pred_unmatched"


def normalize_label(label: str) -> str:
    """Casefold, trim, and collapse internal whitespace runs to one space."""
    return " ".join(label.casefold().split())


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance, two-row Wagner-Fischer."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(
                min(
                    prev[j] + 1,
                    cur[j - 1] + 1,
                    prev[j - 1] + (0 if ca == cb else 1),
                )
            )
        prev = cur
    return prev[-1]


def _nls_fraction(a: str, b: str) -> Fraction:
    na, nb = normalize_label(a), normalize_label(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        return Fraction(1)
    return Fraction(longest - levenshtein(na, nb), longest)


def nls(a: str, b: str) -> float:
    """Normalized Levenshtein similarity in [0, 1]; 1 for two empty labels."""
    return float(_nls_fraction(a, b))


@dataclass(frozen=True)
class SeriesMatch:
    """One row of a matching outcome.

    kind is "paired", "gt_unmatched" (no admissible prediction), or
    "pred_unmatched" (prediction series left over). Indices are positions in
    the input label lists; the absent side holds None.
    """

    kind: str
    gt_index: int | None
    pred_index: int | None
    gt_label: str | None
    pred_label: str | None
    nls: float


def match_series(
    gt_labels: list[str],
    pred_labels: list[str],
    threshold: float = 0.5,
) -> list[SeriesMatch]:
    """Match prediction series to ground-truth series one-to-one.

    Pairs are admissible when their similarity strictly exceeds the
    threshold. The assignment maximizes total similarity (exact search with
    rational arithmetic, so ties are real ties); ties are broken by giving
    the smallest ground-truth index its smallest admissible prediction index
    first. Returns ground-truth rows in order, then leftover predictions in
    order.
    """
    n_gt, n_pred = len(gt_labels), len(pred_labels)
    scores: list[list[Fraction | None]] = [
        [None] * n_pred for _ in range(n_gt)
    ]
    admissible: list[list[int]] = [[] for _ in range(n_gt)]
    for i in range(n_gt):
        for j in range(n_pred):
            s = _nls_fraction(gt_labels[i], pred_labels[j])
            if s > Fraction(threshold):
                scores[i][j] = s
                admissible[i].append(j)

    # Compact bitmask over predictions that appear in any admissible pair.
    involved = sorted({j for row in admissible for j in row})
    bit_of = {j: k for k, j in enumerate(involved)}
    memo: dict[tuple[int, int], Fraction] = {}

    def best(i: int, used: int) -> Fraction:
        if i == n_gt:
            return Fraction(0)
        key = (i, used)
        if key not in memo:
            value = best(i + 1, used)  # leave gt i unmatched
            for j in admissible[i]:
                bit = 1 << bit_of[j]
                if used & bit:
                    continue
                cand = scores[i][j] + best(i + 1, used | bit)
                if cand > value:
                    value = cand
            memo[key] = value
        return memo[key]

    assignment: dict[int, int] = {}
    used = 0
    for i in range(n_gt):
        target = best(i, used)
        chosen = None
        for j in admissible[i]:
            bit = 1 << bit_of[j]
            if used & bit:
                continue
            if scores[i][j] + best(i + 1, used | bit) == target:
                chosen = j
                break
        if chosen is not None:
            assignment[i] = chosen
            used |= 1 << bit_of[chosen]

    out: list[SeriesMatch] = []
    taken = set(assignment.values())
    for i in range(n_gt):
        if i in assignment:
            j = assignment[i]
            out.append(
                SeriesMatch(
                    PAIRED, i, j, gt_labels[i], pred_labels[j], float(scores[i][j])
                )
            )
        else:
            out.append(SeriesMatch(GT_UNMATCHED, i, None, gt_labels[i], None, 0.0))
    for j in range(n_pred):
        if j not in taken:
            out.append(SeriesMatch(PRED_UNMATCHED, None, j, None, pred_labels[j], 0.0))
    return out
