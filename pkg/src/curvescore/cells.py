"""Key/value baseline scores over flattened table cells.

A table flattens to one cell per present value, keyed by the normalized
series label and x label joined with a unit separator. The parts are
normalized individually and the joined key is compared as-is afterwards
(re-normalizing the whole key would swallow the separator, merging distinct
keys). The continuous score pairs cells by key similarity times value
closeness; the strict variant counts a pair only when the key similarity
clears 0.5 and the value lands within a relative tolerance that depends on
the chart type. Both use an exact maximum-total assignment restricted to
pairs with positive score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .matching import levenshtein, normalize_label

__all__ = [
    "KEY_SEP",
    "CellEntry",
    "table_to_cells",
    "key_nls",
    "nls_matrix",
    "KVScore",
    "rms_score",
    "scrm_score",
    "scrm_tolerance",
]

KEY_SEP = "\x1f"
VALUE_EPS = 1e-9
STRICT_KEY_THRESHOLD = 0.5


@dataclass(frozen=True)
class CellEntry:
    """One present table cell: composite key and numeric value."""

    key: str
    value: float


def table_to_cells(table) -> list[CellEntry]:
    """Flatten a ChartTable to cells (series order, then row order)."""
    cells: list[CellEntry] = []
    for series in table.series:
        label_part = normalize_label(series.label)
        for x_label, value in series.points:
            if value is None:
                continue
            cells.append(
                CellEntry(label_part + KEY_SEP + normalize_label(x_label), value)
            )
    return cells


def key_nls(a: str, b: str) -> float:
    """Similarity of two composite keys, compared without re-normalization."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


@njit(cache=True, nogil=True, parallel=True)
def _lev_matrix(codes_a, lens_a, codes_b, lens_b):
    na = lens_a.shape[0]
    nb = lens_b.shape[0]
    out = np.empty((na, nb), dtype=np.int32)
    for ia in prange(na):
        la = lens_a[ia]
        row_a = codes_a[ia]
        prev = np.empty(512, dtype=np.int32)
        cur = np.empty(512, dtype=np.int32)
        for ib in range(nb):
            lb = lens_b[ib]
            row_b = codes_b[ib]
            if la == lb:
                same = True
                for k in range(la):
                    if row_a[k] != row_b[k]:
                        same = False
                        break
                if same:
                    out[ia, ib] = 0
                    continue
            for j in range(lb + 1):
                prev[j] = j
            for i in range(1, la + 1):
                cur[0] = i
                ca = row_a[i - 1]
                for j in range(1, lb + 1):
                    best = prev[j - 1] + (0 if ca == row_b[j - 1] else 1)
                    if prev[j] + 1 < best:
                        best = prev[j] + 1
                    if cur[j - 1] + 1 < best:
                        best = cur[j - 1] + 1
                    cur[j] = best
                for j in range(lb + 1):
                    prev[j] = cur[j]
            out[ia, ib] = prev[lb]
    return out


def _encode_keys(keys: list[str], width: int) -> tuple[np.ndarray, np.ndarray]:
    codes = np.zeros((len(keys), max(width, 1)), dtype=np.int32)
    lens = np.empty(len(keys), dtype=np.int32)
    for i, key in enumerate(keys):
        lens[i] = len(key)
        for k, ch in enumerate(key):
            codes[i, k] = ord(ch)
    return codes, lens


def nls_matrix(keys_a: list[str], keys_b: list[str]) -> np.ndarray:
    """Pairwise key similarity (rows = keys_a, cols = keys_b)."""
    if not keys_a or not keys_b:
        return np.zeros((len(keys_a), len(keys_b)), dtype=np.float64)
    width = max(max(len(k) for k in keys_a), max(len(k) for k in keys_b))
    if width >= 512:
        raise ValueError("cell keys longer than 511 characters are not supported")
    codes_a, lens_a = _encode_keys(keys_a, width)
    codes_b, lens_b = _encode_keys(keys_b, width)
    dist = _lev_matrix(codes_a, lens_a, codes_b, lens_b).astype(np.float64)
    longest = np.maximum(lens_a[:, None], lens_b[None, :]).astype(np.float64)
    out = np.empty_like(dist)
    both_empty = longest == 0
    out[both_empty] = 1.0
    out[~both_empty] = 1.0 - dist[~both_empty] / longest[~both_empty]
    return out


def _max_assignment(scores: np.ndarray) -> tuple[float, int]:
    """Exact maximum-total assignment over pairs with positive score.

    Returns (total score, number of selected positive pairs). The positive
    pairs partition into connected components of the bipartite candidate
    graph; each component is solved exactly on its own block.
    """
    n_pred, n_gt = scores.shape
    rows, cols = np.nonzero(scores > 0.0)
    if rows.size == 0:
        return 0.0, 0
    graph = coo_matrix(
        (np.ones(rows.size, dtype=np.int8), (rows, cols + n_pred)),
        shape=(n_pred + n_gt, n_pred + n_gt),
    )
    _, labels = connected_components(graph, directed=False)
    pred_labels = labels[:n_pred]
    gt_labels = labels[n_pred:]
    total = 0.0
    count = 0
    for comp in sorted(set(pred_labels[np.unique(rows)].tolist())):
        comp_rows = np.nonzero(pred_labels == comp)[0]
        comp_cols = np.nonzero(gt_labels == comp)[0]
        if comp_rows.size == 0 or comp_cols.size == 0:
            continue
        block = scores[np.ix_(comp_rows, comp_cols)]
        ri, ci = linear_sum_assignment(block, maximize=True)
        for r, c in zip(ri, ci):
            s = block[r, c]
            if s > 0.0:
                total += float(s)
                count += 1
    return total, count


@dataclass(frozen=True)
class KVScore:
    precision: float
    recall: float
    f1: float
    matched_total: float
    n_pred: int
    n_gt: int


def _prf(total: float, n_pred: int, n_gt: int) -> KVScore:
    if n_pred == 0 and n_gt == 0:
        return KVScore(1.0, 1.0, 1.0, 0.0, 0, 0)
    precision = total / n_pred if n_pred else 0.0
    recall = total / n_gt if n_gt else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return KVScore(precision, recall, f1, total, n_pred, n_gt)


def rms_score(pred_cells: list[CellEntry], gt_cells: list[CellEntry]) -> KVScore:
    """Continuous key/value score: key similarity times value closeness."""
    if not pred_cells or not gt_cells:
        return _prf(0.0, len(pred_cells), len(gt_cells))
    sim = nls_matrix([c.key for c in pred_cells], [c.key for c in gt_cells])
    pv = np.array([c.value for c in pred_cells], dtype=np.float64)
    gv = np.array([c.value for c in gt_cells], dtype=np.float64)
    rel = np.abs(pv[:, None] - gv[None, :]) / np.maximum(np.abs(gv)[None, :], VALUE_EPS)
    closeness = 1.0 - np.minimum(1.0, rel)
    total, _ = _max_assignment(sim * closeness)
    return _prf(total, len(pred_cells), len(gt_cells))


def scrm_tolerance(chart_type: str | None) -> float:
    """Relative value tolerance: 5% for bar charts, 10% otherwise."""
    return 0.05 if chart_type == "bar" else 0.10


def scrm_score(
    pred_cells: list[CellEntry],
    gt_cells: list[CellEntry],
    chart_type: str | None = None,
) -> KVScore:
    """Strict cell-recovery score: a pair counts iff the key similarity
    exceeds 0.5 and the value is within the chart-type tolerance."""
    if not pred_cells or not gt_cells:
        return _prf(0.0, len(pred_cells), len(gt_cells))
    tol = scrm_tolerance(chart_type)
    sim = nls_matrix([c.key for c in pred_cells], [c.key for c in gt_cells])
    pv = np.array([c.value for c in pred_cells], dtype=np.float64)
    gv = np.array([c.value for c in gt_cells], dtype=np.float64)
    value_ok = np.abs(pv[:, None] - gv[None, :]) <= tol * np.maximum(
        np.abs(gv)[None, :], VALUE_EPS
    )
    hits = ((sim > STRICT_KEY_THRESHOLD) & value_ok).astype(np.float64)
    total, count = _max_assignment(hits)
    return _prf(float(count), len(pred_cells), len(gt_cells))
