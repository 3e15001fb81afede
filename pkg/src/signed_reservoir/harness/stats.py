"""Aggregation helpers: grouped medians, Spearman correlation, interval slopes."""
from __future__ import annotations

import math
from collections import defaultdict
from typing import Callable, Iterable

import numpy as np

from .records import ResultRecord


def rankdata(values) -> np.ndarray:
    """Average ranks (1-based) with ties sharing the mean rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation; NaN when either side is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two equally long sequences of length >= 2")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    den = math.sqrt(float(rx @ rx) * float(ry @ ry))
    return float(rx @ ry / den) if den > 0 else float("nan")


def grouped_median(records: Iterable[ResultRecord], key: Callable[[ResultRecord], object],
                   value: Callable[[ResultRecord], float | None]) -> dict:
    """Median of ``value`` per ``key`` over ok records, keys sorted."""
    groups: dict = defaultdict(list)
    for r in records:
        if not r.ok:
            continue
        v = value(r)
        if v is not None:
            groups[key(r)].append(v)
    return {k: float(np.median(sorted(groups[k]))) for k in sorted(groups)}


def interval_slope(xs, ys, lo: float, hi: float) -> float:
    """Least-squares slope of y against x over points with lo <= x <= hi."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    sel = (xs >= lo - 1e-12) & (xs <= hi + 1e-12)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two points in [{lo}, {hi}]")
    return float(np.polyfit(xs[sel], ys[sel], 1)[0])
