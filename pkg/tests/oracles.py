"""Independent brute-force reference implementations used only by tests.

Every function here is written from the defining formula, not from the
package's algorithms: alignment costs by exhaustive enumeration of all
monotone paths, ranks by the counting definition, assignments by trying all
permutations. Costs are accumulated forward along each path (one addition
per step), which is the same association order a dynamic program uses, so
minima are comparable bitwise.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def sub_cost(p: float, t: float, y_min: float, y_max: float, theta: float) -> float:
    """Tolerance-gated substitution cost on the ground-truth value range."""
    if y_max == y_min:
        return 0.0 if p == t else 1.0
    delta = abs(p - t) / (y_max - y_min)
    return delta if delta <= theta else 1.0


def erp_min_cost(
    p: list[float],
    t: list[float],
    y_min: float,
    y_max: float,
    theta: float,
    lam: float,
) -> float:
    """Exhaustive minimum edit cost over all monotone match/insert/delete paths."""
    m, n = len(p), len(t)
    best = [math.inf]

    def walk(i: int, j: int, acc: float) -> None:
        if i == m and j == n:
            if acc < best[0]:
                best[0] = acc
            return
        if i < m and j < n:
            walk(i + 1, j + 1, acc + sub_cost(p[i], t[j], y_min, y_max, theta))
        if j < n:
            walk(i, j + 1, acc + lam)
        if i < m:
            walk(i + 1, j, acc + lam)

    walk(0, 0, 0.0)
    return best[0]


def erp_optimal_paths(
    p: list[float],
    t: list[float],
    y_min: float,
    y_max: float,
    theta: float,
    lam: float,
) -> list[list[tuple]]:
    """All cost-minimal edit paths, as op lists (for deriving frozen examples)."""
    m, n = len(p), len(t)
    results: list[tuple[float, list[tuple]]] = []

    def walk(i: int, j: int, acc: float, ops: list[tuple]) -> None:
        if i == m and j == n:
            results.append((acc, list(ops)))
            return
        if i < m and j < n:
            ops.append(("match", i, j))
            walk(i + 1, j + 1, acc + sub_cost(p[i], t[j], y_min, y_max, theta), ops)
            ops.pop()
        if j < n:
            ops.append(("delete", None, j))
            walk(i, j + 1, acc + lam, ops)
            ops.pop()
        if i < m:
            ops.append(("insert", i, None))
            walk(i + 1, j, acc + lam, ops)
            ops.pop()

    walk(0, 0, 0.0, [])
    lowest = min(c for c, _ in results)
    return [ops for c, ops in results if c == lowest]


def dtw_min_cost(
    p: list[float],
    t: list[float],
    y_min: float,
    y_max: float,
    theta: float,
) -> float:
    """Exhaustive minimum over all warping paths; every visited cell pays."""
    m, n = len(p), len(t)
    assert m > 0 and n > 0
    best = [math.inf]

    def walk(i: int, j: int, acc: float) -> None:
        acc = acc + sub_cost(p[i], t[j], y_min, y_max, theta)
        if i == m - 1 and j == n - 1:
            if acc < best[0]:
                best[0] = acc
            return
        if i < m - 1 and j < n - 1:
            walk(i + 1, j + 1, acc)
        if j < n - 1:
            walk(i, j + 1, acc)
        if i < m - 1:
            walk(i + 1, j, acc)

    walk(0, 0, 0.0)
    return best[0]


def levenshtein(a: str, b: str) -> int:
    """Memoized-recursion edit distance (unit costs)."""
    seen: dict[tuple[int, int], int] = {}

    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        key = (i, j)
        if key not in seen:
            seen[key] = min(
                d(i - 1, j) + 1,
                d(i, j - 1) + 1,
                d(i - 1, j - 1) + (0 if a[i - 1] == b[j - 1] else 1),
            )
        return seen[key]

    return d(len(a), len(b))


def average_ranks(values: list[float]) -> list[float]:
    """1-based ranks by the counting definition, ties sharing the average."""
    ranks = []
    for v in values:
        less = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks.append(less + (equal + 1) / 2)
    return ranks


def pearson(x: list[float], y: list[float]) -> float | None:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def spearman(x: list[float], y: list[float]) -> float | None:
    return pearson(average_ranks(x), average_ranks(y))


def best_assignment_total(scores: list[list[Fraction]]) -> Fraction:
    """Maximum-total one-to-one assignment by trying every injection.

    scores[i][j] is the value of pairing row i with column j; None marks an
    inadmissible pair (row left unmatched if chosen).
    """
    n_rows = len(scores)
    n_cols = len(scores[0]) if n_rows else 0
    best = Fraction(0)
    cols = list(range(n_cols)) + [None] * n_rows
    for combo in itertools.permutations(cols, n_rows):
        used = [c for c in combo if c is not None]
        if len(used) != len(set(used)):
            continue
        total = Fraction(0)
        ok = True
        for i, c in enumerate(combo):
            if c is None:
                continue
            if scores[i][c] is None:
                ok = False
                break
            total += scores[i][c]
        if ok and total > best:
            best = total
    return best
