"""Gap-penalized sequence alignment and similarity scores for value series.

Two scores share one substitution cost. The primary score aligns prediction
and ground-truth values with explicit insert/delete gaps (constant penalty)
and normalizes the optimal edit cost by the number of alignment operations.
The DTW baseline warps both sequences with no gap charge — every step pays
the substitution cost of the cell it lands on — and normalizes by warping
path length, which lets it absorb truncation and repetition for free; the
contrast between the two is the point of reporting both.

The substitution cost rescales the absolute value difference by the
ground-truth value range and is clipped to 1 beyond a tolerance theta, so a
point is either "close enough" (small partial cost) or simply wrong (full
cost), regardless of how wrong.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "AlignmentError",
    "EmptyGroundTruth",
    "EmptyInput",
    "AlignParams",
    "ValueContext",
    "context_from_values",
    "substitution_cost",
    "AlignmentResult",
    "erp_align",
    "ecs_from_alignment",
    "ecs_series",
    "DtwResult",
    "dtw_align",
    "dtw_series",
]

MATCH = "match"
INSERT = "insert"
DELETE = "delete"


class AlignmentError(ValueError):
    pass


class EmptyGroundTruth(AlignmentError):
    """The ground-truth series has no present values to score against."""


class EmptyInput(AlignmentError):
    """DTW needs at least one present value on each side."""


@dataclass(frozen=True)
class AlignParams:
    """theta: substitution tolerance; gap_penalty: per-gap charge (lambda)."""

    theta: float = 0.01
    gap_penalty: float = 1.0

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be > 0")
        if self.gap_penalty <= 0:
            raise ValueError("gap penalty must be > 0")


@dataclass(frozen=True)
class ValueContext:
    """Value range of the ground-truth series, used to normalize differences."""

    y_min: float
    y_max: float


def context_from_values(values: list[float] | np.ndarray) -> ValueContext:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyGroundTruth("cannot build a value context from no values")
    return ValueContext(float(arr.min()), float(arr.max()))


def substitution_cost(p: float, t: float, ctx: ValueContext, theta: float) -> float:
    """Range-normalized difference if within theta, else 1.

    A constant ground-truth series has no range; then only exact equality
    scores 0.
    """
    if ctx.y_max == ctx.y_min:
        return 0.0 if p == t else 1.0
    delta = abs(p - t) / (ctx.y_max - ctx.y_min)
    return delta if delta <= theta else 1.0


@njit(cache=True, nogil=True)
def _sub_cost(p: float, t: float, y_min: float, y_max: float, theta: float) -> float:
    if y_max == y_min:
        return 0.0 if p == t else 1.0
    delta = abs(p - t) / (y_max - y_min)
    return delta if delta <= theta else 1.0


@njit(cache=True, nogil=True)
def _erp_kernel(p, t, y_min, y_max, theta, lam):
    """Edit-cost DP with gap penalty; returns (cost, move matrix).

    Moves: 1 = match (diagonal), 2 = delete ground truth (advance j),
    3 = insert prediction (advance i). Ties keep the earlier move in that
    order, which fixes the backtracked path deterministically. Only two cost
    rows are held; the move matrix is what backtracking needs.
    """
    m = p.shape[0]
    n = t.shape[0]
    move = np.zeros((m + 1, n + 1), dtype=np.uint8)
    prev = np.empty(n + 1, dtype=np.float64)
    cur = np.empty(n + 1, dtype=np.float64)
    prev[0] = 0.0
    for j in range(1, n + 1):
        prev[j] = prev[j - 1] + lam
        move[0, j] = 2
    for i in range(1, m + 1):
        cur[0] = prev[0] + lam
        move[i, 0] = 3
        for j in range(1, n + 1):
            d = _sub_cost(p[i - 1], t[j - 1], y_min, y_max, theta)
            best = prev[j - 1] + d
            mv = 1
            cand = cur[j - 1] + lam
            if cand < best:
                best = cand
                mv = 2
            cand = prev[j] + lam
            if cand < best:
                best = cand
                mv = 3
            cur[j] = best
            move[i, j] = mv
        prev, cur = cur, prev
    return prev[n], move


@njit(cache=True, nogil=True)
def _dtw_kernel(p, t, y_min, y_max, theta):
    """Classic DTW over the same substitution cost; every step pays its cell.

    Moves into cell (i, j): 1 = diagonal, 2 = horizontal (advance j),
    3 = vertical (advance i), with the same tie preference as the edit DP.
    """
    m = p.shape[0]
    n = t.shape[0]
    move = np.zeros((m, n), dtype=np.uint8)
    prev = np.empty(n, dtype=np.float64)
    cur = np.empty(n, dtype=np.float64)
    prev[0] = _sub_cost(p[0], t[0], y_min, y_max, theta)
    for j in range(1, n):
        prev[j] = prev[j - 1] + _sub_cost(p[0], t[j], y_min, y_max, theta)
        move[0, j] = 2
    for i in range(1, m):
        cur[0] = prev[0] + _sub_cost(p[i], t[0], y_min, y_max, theta)
        move[i, 0] = 3
        for j in range(1, n):
            best = prev[j - 1]
            mv = 1
            if cur[j - 1] < best:
                best = cur[j - 1]
                mv = 2
            if prev[j] < best:
                best = prev[j]
                mv = 3
            cur[j] = best + _sub_cost(p[i], t[j], y_min, y_max, theta)
            move[i, j] = mv
        prev, cur = cur, prev
    return prev[n - 1], move


@dataclass
class AlignmentResult:
    """Optimal alignment: cost, op counts, matched substitution total, path.

    path ops are ("match", i, j), ("insert", i, None), ("delete", None, j)
    with 0-based indices into the present-value sequences.
    """

    cost: float
    n_match: int
    n_insert: int
    n_delete: int
    sub_cost_total: float
    path: list[tuple] = field(default_factory=list)

    @property
    def path_length(self) -> int:
        return self.n_match + self.n_insert + self.n_delete


def erp_align(
    p_values: list[float] | np.ndarray,
    t_values: list[float] | np.ndarray,
    ctx: ValueContext,
    params: AlignParams,
) -> AlignmentResult:
    """Align prediction values to ground-truth values with explicit gaps.

    Either side may be empty; the path then degenerates to pure gaps.
    """
    p = np.ascontiguousarray(np.asarray(p_values, dtype=np.float64))
    t = np.ascontiguousarray(np.asarray(t_values, dtype=np.float64))
    cost, move = _erp_kernel(
        p, t, ctx.y_min, ctx.y_max, params.theta, params.gap_penalty
    )
    ops: list[tuple] = []
    n_match = n_insert = n_delete = 0
    sub_total = 0.0
    i, j = p.shape[0], t.shape[0]
    while i > 0 or j > 0:
        mv = move[i, j]
        if mv == 1:
            i -= 1
            j -= 1
            ops.append((MATCH, i, j))
            n_match += 1
            sub_total += substitution_cost(float(p[i]), float(t[j]), ctx, params.theta)
        elif mv == 2:
            j -= 1
            ops.append((DELETE, None, j))
            n_delete += 1
        else:
            i -= 1
            ops.append((INSERT, i, None))
            n_insert += 1
    ops.reverse()
    return AlignmentResult(
        cost=float(cost),
        n_match=n_match,
        n_insert=n_insert,
        n_delete=n_delete,
        sub_cost_total=sub_total,
        path=ops,
    )


def ecs_from_alignment(result: AlignmentResult) -> float:
    """1 - cost / path length, clamped below at 0."""
    length = result.path_length
    if length == 0:
        return 1.0
    return max(0.0, 1.0 - result.cost / length)


def ecs_series(p_series, t_series, params: AlignParams) -> tuple[float, AlignmentResult]:
    """Score a prediction series against a ground-truth series.

    Both series are reduced to their present-value subsequences; the value
    context comes from the ground truth, which must have at least one
    present value.
    """
    t_vals = t_series.present_values()
    if not t_vals:
        raise EmptyGroundTruth(
            f"ground-truth series {t_series.label!r} has no present values"
        )
    p_vals = p_series.present_values()
    ctx = context_from_values(t_vals)
    result = erp_align(p_vals, t_vals, ctx, params)
    return ecs_from_alignment(result), result


@dataclass
class DtwResult:
    cost: float
    path: list[tuple[int, int]] = field(default_factory=list)

    @property
    def path_length(self) -> int:
        return len(self.path)

    @property
    def similarity(self) -> float:
        return 1.0 - self.cost / self.path_length


def dtw_align(
    p_values: list[float] | np.ndarray,
    t_values: list[float] | np.ndarray,
    ctx: ValueContext,
    params: AlignParams,
) -> DtwResult:
    """Warp prediction onto ground truth; both sides must be non-empty."""
    p = np.ascontiguousarray(np.asarray(p_values, dtype=np.float64))
    t = np.ascontiguousarray(np.asarray(t_values, dtype=np.float64))
    if p.size == 0 or t.size == 0:
        raise EmptyInput("DTW needs at least one present value on each side")
    cost, move = _dtw_kernel(p, t, ctx.y_min, ctx.y_max, params.theta)
    cells: list[tuple[int, int]] = []
    i, j = p.shape[0] - 1, t.shape[0] - 1
    while True:
        cells.append((i, j))
        if i == 0 and j == 0:
            break
        mv = move[i, j]
        if mv == 1:
            i -= 1
            j -= 1
        elif mv == 2:
            j -= 1
        else:
            i -= 1
    cells.reverse()
    return DtwResult(cost=float(cost), path=cells)


def dtw_series(p_series, t_series, params: AlignParams) -> float:
    """DTW similarity between two series' present values, in [0, 1]."""
    t_vals = t_series.present_values()
    if not t_vals:
        raise EmptyGroundTruth(
            f"ground-truth series {t_series.label!r} has no present values"
        )
    p_vals = p_series.present_values()
    if not p_vals:
        raise EmptyInput(
            f"prediction series {p_series.label!r} has no present values"
        )
    ctx = context_from_values(t_vals)
    return dtw_align(p_vals, t_vals, ctx, params).similarity
