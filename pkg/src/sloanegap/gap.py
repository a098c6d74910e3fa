"""Percentile boundary through the occurrence cloud and the above/below split.

The boundary at n is a nearest-rank percentile of the counts in a
window around n; integers whose count strictly exceeds their boundary
form the set A ("above" the gap).  The same windows feed gap_score, a
bimodality statistic used to compare clouds: the widest empty band
between order statistics of ln N inside the p10-p90 range, normalized
by that range, median-aggregated over windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import OccurrenceTable


class EmptyInput(ValueError):
    """Percentile of an empty value list."""


class RangeError(ValueError):
    """Occurrence table does not cover the requested study range."""


@dataclass(frozen=True)
class GapParams:
    """Study range, percentile level and window half-widths."""

    n_start: int = 301
    n_end: int = 10000
    percentile: float = 82.0
    c_small: int = 100
    c_large: int = 350

    def __post_init__(self):
        if self.n_start < 1:
            raise ValueError(f"n_start must be >= 1, got {self.n_start}")
        if self.n_end < self.n_start:
            raise ValueError(f"n_end {self.n_end} < n_start {self.n_start}")
        if not 0.0 < self.percentile < 100.0:
            raise ValueError(f"percentile must be in (0, 100), got {self.percentile}")
        if self.c_small < 1 or self.c_large < 1:
            raise ValueError("window half-widths must be >= 1")

    def half_width(self, n: int) -> int:
        return self.c_small if n <= 1000 else self.c_large


@dataclass
class GapPartition:
    """Boundary value and above-membership for each n in the study range."""

    params: GapParams
    boundary: np.ndarray
    in_A: np.ndarray
    size_A: int

    def __post_init__(self):
        span = self.params.n_end - self.params.n_start + 1
        if self.boundary.shape != (span,) or self.in_A.shape != (span,):
            raise ValueError("boundary/in_A must cover the study range exactly")
        if self.size_A != int(np.count_nonzero(self.in_A)):
            raise ValueError("size_A does not match in_A")
        self.boundary.flags.writeable = False
        self.in_A.flags.writeable = False

    def index(self, n: int) -> int:
        if not self.params.n_start <= n <= self.params.n_end:
            raise ValueError(f"n={n} outside study range")
        return n - self.params.n_start

    def boundary_of(self, n: int) -> float:
        return float(self.boundary[self.index(n)])

    def contains(self, n: int) -> bool:
        return bool(self.in_A[self.index(n)])

    def members(self) -> np.ndarray:
        """Ascending array of the n classified above."""
        return np.nonzero(self.in_A)[0] + self.params.n_start

    @property
    def fraction_A(self) -> float:
        return self.size_A / (self.params.n_end - self.params.n_start + 1)

    def write_csv(self, fh, table: OccurrenceTable) -> None:
        """Rows n,count,boundary,in_A over the study range; in_A as 0/1."""
        fh.write("n,count,boundary,in_A\n")
        for i in range(self.params.n_end - self.params.n_start + 1):
            n = self.params.n_start + i
            fh.write(
                f"{n},{table.counts[n]},{self.boundary[i]},{int(self.in_A[i])}\n"
            )

    def to_csv(self, path, table: OccurrenceTable) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh, table)


def percentile_nearest_rank(values, p: float) -> float:
    """The ceil(p/100 * m)-th smallest of m values; always an element."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("percentile of empty input")
    if not 0.0 < p < 100.0:
        raise ValueError(f"p must be in (0, 100), got {p}")
    k = math.ceil(p / 100.0 * arr.size)
    return float(np.partition(arr, k - 1)[k - 1])


def _window_bounds(n: int, params: GapParams) -> tuple[int, int]:
    c = params.half_width(n)
    return max(n - c, params.n_start), min(n + c, params.n_end)


def boundary_at(table: OccurrenceTable, n: int, params: GapParams) -> float:
    """Nearest-rank percentile of the counts in the clipped window around n."""
    if not params.n_start <= n <= params.n_end:
        raise ValueError(f"n={n} outside study range [{params.n_start}, {params.n_end}]")
    lo, hi = _window_bounds(n, params)
    return percentile_nearest_rank(table.counts[lo : hi + 1], params.percentile)


def limit_value(table: OccurrenceTable, n: int, params: GapParams) -> int:
    """Smallest integer count that would strictly exceed the boundary at n."""
    return math.floor(boundary_at(table, n, params)) + 1


def classify(table: OccurrenceTable, params: GapParams) -> GapPartition:
    """Fill boundary and membership for every n in the study range.

    Membership is strict: n is above iff N(n) > boundary(n).
    """
    if table.n_max < params.n_end:
        raise RangeError(
            f"table covers [1, {table.n_max}] but study range ends at {params.n_end}"
        )
    span = params.n_end - params.n_start + 1
    boundary = np.empty(span, dtype=np.float64)
    counts = table.counts
    p = params.percentile
    for i in range(span):
        n = params.n_start + i
        lo, hi = _window_bounds(n, params)
        window = counts[lo : hi + 1]
        k = math.ceil(p / 100.0 * window.size)
        boundary[i] = np.partition(window, k - 1)[k - 1]
    in_range = counts[params.n_start : params.n_end + 1].astype(np.float64)
    in_A = in_range > boundary
    return GapPartition(
        params=params,
        boundary=boundary,
        in_A=in_A,
        size_A=int(np.count_nonzero(in_A)),
    )


MIN_WINDOW_POINTS = 20


def gap_score(table: OccurrenceTable, params: GapParams) -> float:
    """Median over windows of the widest normalized empty band in ln N.

    Windows [n-c, n+c] step by c across the study range.  A window
    qualifies when it holds at least MIN_WINDOW_POINTS positive counts;
    its value is the largest difference between consecutive order
    statistics of ln N within the nearest-rank p10-p90 band, divided by
    (p90 - p10).  Degenerate bands (p90 = p10) contribute 0, as does a
    cloud with no qualifying window at all.
    """
    if table.n_max < params.n_end:
        raise RangeError(
            f"table covers [1, {table.n_max}] but study range ends at {params.n_end}"
        )
    scores = []
    center = params.n_start
    counts = table.counts
    while center <= params.n_end:
        c = params.half_width(center)
        lo, hi = _window_bounds(center, params)
        window = counts[lo : hi + 1]
        positive = window[window >= 1]
        if positive.size >= MIN_WINDOW_POINTS:
            y = np.sort(np.log(positive.astype(np.float64)))
            p10 = y[math.ceil(0.10 * y.size) - 1]
            p90 = y[math.ceil(0.90 * y.size) - 1]
            if p90 > p10:
                band = y[(y >= p10) & (y <= p90)]
                widest = float(np.max(np.diff(band)))
                scores.append(widest / (p90 - p10))
            else:
                scores.append(0.0)
        center += c
    if not scores:
        return 0.0
    return float(np.median(scores))
