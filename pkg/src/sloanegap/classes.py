"""Number-class predicates and their cross-tabulation against the partition.

Three classes are tracked over the study range: primes, perfect
squares, and "many-factors" numbers, i.e. n whose prime-factor count
with multiplicity strictly exceeds the 95th nearest-rank percentile of
that count over a +/-100 window.  The cross-tab reports, per class, how
much of the above-the-gap set A it explains; rows use the precedence
primes > squares > many-factors so every integer is counted once, and a
residual "other" row absorbs unexplained members of A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gap import GapPartition, percentile_nearest_rank


class RangeMismatch(ValueError):
    """Partition and class flags cover different study ranges."""


def sieve(n_end: int) -> tuple[np.ndarray, np.ndarray]:
    """Primality flags and smallest-prime-factor array for 0..n_end.

    spf[n] is the smallest prime factor of n for n >= 2; spf[1] = 1.
    """
    if n_end < 2:
        raise ValueError(f"n_end must be >= 2, got {n_end}")
    spf = np.zeros(n_end + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n_end) + 1):
        if spf[i] == 0:
            block = spf[i * i :: i]
            block[block == 0] = i
    untouched = spf == 0
    untouched[:2] = False
    spf[untouched] = np.nonzero(untouched)[0]
    spf[1] = 1
    is_prime = np.zeros(n_end + 1, dtype=bool)
    is_prime[2:] = spf[2:] == np.arange(2, n_end + 1)
    return is_prime, spf


def omega(n: int, spf: np.ndarray) -> int:
    """Number of prime factors of n counted with multiplicity; omega(1) = 0."""
    if not 1 <= n < spf.size:
        raise ValueError(f"n={n} outside sieve range")
    count = 0
    while n > 1:
        p = int(spf[n])
        while n % p == 0:
            n //= p
            count += 1
    return count


def omega_array(n_end: int, spf: np.ndarray) -> np.ndarray:
    """omega(n) for all n in 0..n_end via the recurrence on spf."""
    if spf.size < n_end + 1:
        raise ValueError("spf array too short")
    out = np.zeros(n_end + 1, dtype=np.int64)
    for n in range(2, n_end + 1):
        out[n] = out[n // spf[n]] + 1
    return out


def is_square(n: int) -> bool:
    """Exact integer-sqrt test; no floating point."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    r = math.isqrt(n)
    return r * r == n


DEFAULT_OMEGA_WINDOW = 100
DEFAULT_OMEGA_PCT = 95.0


def many_factors_flags(
    omega_values: np.ndarray,
    n_range: tuple[int, int],
    window: int = DEFAULT_OMEGA_WINDOW,
    pct: float = DEFAULT_OMEGA_PCT,
) -> np.ndarray:
    """Flag n whose factor count strictly exceeds its window percentile.

    omega_values is indexed by absolute n and must cover n_range.  The
    window [n-window, n+window] is clipped to n_range and includes n
    itself.  Returns a bool array aligned to n_range.
    """
    n_start, n_end = n_range
    if not 1 <= n_start <= n_end:
        raise ValueError(f"bad range {n_range}")
    if omega_values.size < n_end + 1:
        raise ValueError("omega_values does not cover the range")
    span = n_end - n_start + 1
    flags = np.zeros(span, dtype=bool)
    for i in range(span):
        n = n_start + i
        lo = max(n - window, n_start)
        hi = min(n + window, n_end)
        win = omega_values[lo : hi + 1]
        k = math.ceil(pct / 100.0 * win.size)
        threshold = np.partition(win, k - 1)[k - 1]
        flags[i] = omega_values[n] > threshold
    return flags


@dataclass
class ClassFlags:
    """Per-n class predicates and factor counts over a study range."""

    n_start: int
    n_end: int
    is_prime: np.ndarray
    is_square: np.ndarray
    many_factors: np.ndarray
    omega: np.ndarray

    @classmethod
    def compute(
        cls,
        n_range: tuple[int, int],
        window: int = DEFAULT_OMEGA_WINDOW,
        pct: float = DEFAULT_OMEGA_PCT,
    ) -> "ClassFlags":
        n_start, n_end = n_range
        prime_full, spf = sieve(n_end)
        omega_full = omega_array(n_end, spf)
        ns = np.arange(n_start, n_end + 1)
        squares = np.array([is_square(int(n)) for n in ns], dtype=bool)
        return cls(
            n_start=n_start,
            n_end=n_end,
            is_prime=prime_full[n_start : n_end + 1].copy(),
            is_square=squares,
            many_factors=many_factors_flags(omega_full, n_range, window, pct),
            omega=omega_full[n_start : n_end + 1].copy(),
        )


@dataclass(frozen=True)
class ClassRow:
    """One cross-tab row; counts in A are precedence-disjoint."""

    name: str
    count_in_A: int
    percent_of_A: float
    cumulative_percent_of_A: float
    count_in_class: int
    percent_of_class_in_A: float
    membership_ratio: float


@dataclass
class ClassCrossTab:
    rows: list
    size_A: int
    n_start: int
    n_end: int

    def row(self, name: str) -> ClassRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def write_csv(self, fh) -> None:
        fh.write("class,in_A,pct_of_A,cum_pct,pct_class_in_A,ratio\n")
        for r in self.rows:
            fh.write(
                f"{r.name},{r.count_in_A},{r.percent_of_A},"
                f"{r.cumulative_percent_of_A},{r.percent_of_class_in_A},"
                f"{r.membership_ratio}\n"
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)


def _ratio(in_class_and_A: int, class_total: int, in_comp_and_A: int, comp_total: int) -> float:
    """P(A | class) / P(A | not class), with 0/0 treated as 0."""
    p_class = in_class_and_A / class_total if class_total else 0.0
    p_comp = in_comp_and_A / comp_total if comp_total else 0.0
    if p_class == 0.0:
        return 0.0
    if p_comp == 0.0:
        return math.inf
    return p_class / p_comp


def cross_tab(partition: GapPartition, flags: ClassFlags) -> ClassCrossTab:
    """Tabulate class membership against the above-the-gap set A."""
    if (partition.params.n_start, partition.params.n_end) != (flags.n_start, flags.n_end):
        raise RangeMismatch(
            f"partition range [{partition.params.n_start}, {partition.params.n_end}]"
            f" != flags range [{flags.n_start}, {flags.n_end}]"
        )
    in_A = partition.in_A
    size_A = partition.size_A
    total = flags.n_end - flags.n_start + 1

    ordered = [
        ("primes", flags.is_prime),
        ("squares", flags.is_square),
        ("many_factors", flags.many_factors),
    ]
    rows = []
    cumulative = 0.0
    claimed = np.zeros(total, dtype=bool)
    for name, raw in ordered:
        exclusive = raw & ~claimed
        claimed |= raw
        count_in_A = int(np.count_nonzero(exclusive & in_A))
        class_total = int(np.count_nonzero(raw))
        raw_in_A = int(np.count_nonzero(raw & in_A))
        comp_total = total - class_total
        comp_in_A = size_A - raw_in_A
        pct_of_A = 100.0 * count_in_A / size_A if size_A else 0.0
        cumulative += pct_of_A
        rows.append(
            ClassRow(
                name=name,
                count_in_A=count_in_A,
                percent_of_A=pct_of_A,
                cumulative_percent_of_A=cumulative,
                count_in_class=class_total,
                percent_of_class_in_A=(100.0 * raw_in_A / class_total if class_total else 0.0),
                membership_ratio=_ratio(raw_in_A, class_total, comp_in_A, comp_total),
            )
        )

    residual = ~claimed
    res_in_A = int(np.count_nonzero(residual & in_A))
    res_total = int(np.count_nonzero(residual))
    pct_of_A = 100.0 * res_in_A / size_A if size_A else 0.0
    cumulative += pct_of_A
    rows.append(
        ClassRow(
            name="other",
            count_in_A=res_in_A,
            percent_of_A=pct_of_A,
            cumulative_percent_of_A=cumulative,
            count_in_class=res_total,
            percent_of_class_in_A=(100.0 * res_in_A / res_total if res_total else 0.0),
            membership_ratio=_ratio(res_in_A, res_total, size_A - res_in_A, total - res_total),
        )
    )
    return ClassCrossTab(rows=rows, size_A=size_A, n_start=flags.n_start, n_end=flags.n_end)


def proportion_in_A_by_omega(partition: GapPartition, flags: ClassFlags) -> dict:
    """For each factor count present in range, the fraction of those n in A."""
    if (partition.params.n_start, partition.params.n_end) != (flags.n_start, flags.n_end):
        raise RangeMismatch("partition and flags cover different ranges")
    out = {}
    for value in np.unique(flags.omega):
        mask = flags.omega == value
        out[int(value)] = float(np.count_nonzero(partition.in_A & mask) / np.count_nonzero(mask))
    return out
