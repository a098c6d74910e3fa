"""Parse OEIS "stripped" snapshots and build the occurrence table N(n).

The stripped export carries one sequence per line::

    A000045 ,0,1,1,2,3,5,8,13,21,34,

i.e. an A-number, a space, then the leading terms wrapped in commas.
Lines starting with ``#`` are comments.  ``N(n)`` is the number of times
the integer ``n`` occurs across all term lists of a snapshot, counting
repetitions inside a single sequence.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

# Terms longer than this many digits are kept as raw-text sentinels:
# they can never land inside a practical counting range, so converting
# them to int is wasted work.
OVERSIZE_DIGITS = 40

DEFAULT_N_MAX = 10000

_ID_RE = re.compile(r"A(\d+)$")
_TERM_RE = re.compile(r"-?\d+$")


class MalformedLine(ValueError):
    """Raised for a stripped-file line that is neither a comment nor a valid record."""


@dataclass(frozen=True)
class OversizeTerm:
    """A term whose decimal form exceeds OVERSIZE_DIGITS; kept verbatim."""

    raw: str

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True)
class SequenceRecord:
    """One parsed sequence: numeric part of the A-number plus its leading terms."""

    id: int
    terms: tuple

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError(f"sequence id must be positive, got {self.id}")
        if not self.terms:
            raise ValueError("terms must be non-empty")


def parse_line(text: str):
    """Parse one line of a stripped file.

    Returns a SequenceRecord, or None for comment/blank lines (the
    skip-marker).  Raises MalformedLine if the identifier is not "A"
    followed by digits, or the term list is empty or contains a
    non-integer token.
    """
    line = text.strip()
    if not line or line.startswith("#"):
        return None
    head, _, rest = line.partition(" ")
    m = _ID_RE.match(head)
    if m is None:
        raise MalformedLine(f"bad sequence identifier: {head!r}")
    seq_id = int(m.group(1))
    if seq_id <= 0:
        raise MalformedLine(f"sequence id must be positive: {head!r}")
    terms = []
    for token in rest.split(","):
        token = token.strip()
        if not token:
            continue
        if _TERM_RE.match(token) is None:
            raise MalformedLine(f"non-integer term {token!r} in {head}")
        digits = len(token.lstrip("-"))
        if digits > OVERSIZE_DIGITS:
            terms.append(OversizeTerm(token))
        else:
            terms.append(int(token))
    if not terms:
        raise MalformedLine(f"empty term list in {head}")
    return SequenceRecord(id=seq_id, terms=tuple(terms))


def format_line(record: SequenceRecord) -> str:
    """Render a record back to stripped format (inverse of parse_line)."""
    body = ",".join(str(t) for t in record.terms)
    return f"A{record.id:06d} ,{body},"


@dataclass
class OccurrenceTable:
    """Dense N(n) for n in [1, n_max] plus snapshot metadata.

    ``counts[n]`` is the occurrence count of n; index 0 is unused and
    zero.  The array is frozen after construction so tables can be
    shared freely.
    """

    n_max: int
    counts: np.ndarray
    total_terms_seen: int
    snapshot_label: str = ""

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.n_max + 1,):
            raise ValueError(
                f"counts must have length n_max+1={self.n_max + 1}, got {counts.shape}"
            )
        if counts.min() < 0:
            raise ValueError("counts must be non-negative")
        if int(counts.sum()) > self.total_terms_seen:
            raise ValueError("sum of counts exceeds total_terms_seen")
        counts.flags.writeable = False
        self.counts = counts

    def write_csv(self, fh) -> None:
        fh.write("n,count\n")
        for n in range(1, self.n_max + 1):
            fh.write(f"{n},{self.counts[n]}\n")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def to_json_dict(self) -> dict:
        return {
            "snapshot_label": self.snapshot_label,
            "n_max": self.n_max,
            "total_terms_seen": self.total_terms_seen,
            "counts": self.counts[1:].tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, data: dict) -> "OccurrenceTable":
        n_max = int(data["n_max"])
        counts = np.zeros(n_max + 1, dtype=np.int64)
        counts[1:] = np.asarray(data["counts"], dtype=np.int64)
        return cls(
            n_max=n_max,
            counts=counts,
            total_terms_seen=int(data["total_terms_seen"]),
            snapshot_label=data.get("snapshot_label", ""),
        )

    @classmethod
    def from_json(cls, path) -> "OccurrenceTable":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def build_counts(
    records: Iterable[SequenceRecord],
    n_max: int = DEFAULT_N_MAX,
    snapshot_label: str = "",
) -> OccurrenceTable:
    """Accumulate N(n) over a stream of records.

    Every term occurrence counts, including repeats within one sequence.
    Terms <= 0, > n_max, or oversize only increment total_terms_seen.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    counts = np.zeros(n_max + 1, dtype=np.int64)
    total = 0
    buf: list[int] = []
    flush_at = 1 << 20
    for record in records:
        for t in record.terms:
            total += 1
            if isinstance(t, int) and 1 <= t <= n_max:
                buf.append(t)
        if len(buf) >= flush_at:
            counts += np.bincount(buf, minlength=n_max + 1)
            buf.clear()
    if buf:
        counts += np.bincount(buf, minlength=n_max + 1)
    return OccurrenceTable(
        n_max=n_max,
        counts=counts,
        total_terms_seen=total,
        snapshot_label=snapshot_label,
    )


def absent_numbers(table: OccurrenceTable, limit: int) -> list[int]:
    """Ascending n <= limit with N(n) = 0."""
    if not 1 <= limit <= table.n_max:
        raise ValueError(f"limit must be in [1, {table.n_max}], got {limit}")
    zeros = np.nonzero(table.counts[1 : limit + 1] == 0)[0] + 1
    return zeros.tolist()


def interesting_numbers(table: OccurrenceTable) -> list[int]:
    """Ascending n in [2, n_max] with N(n) > N(n-1), strictly."""
    if table.n_max < 2:
        raise ValueError("table must cover at least n=2")
    rising = np.nonzero(np.diff(table.counts[1:]) > 0)[0] + 2
    return rising.tolist()


@dataclass
class IngestStats:
    """Bookkeeping from one pass over a stripped file."""

    sequences_parsed: int = 0
    comment_lines: int = 0
    blank_lines: int = 0
    skipped_lines: int = 0


def iter_stripped(
    lines: Iterable[str],
    strict: bool = False,
    stats: IngestStats | None = None,
) -> Iterator[SequenceRecord]:
    """Yield records from stripped-format lines.

    In lenient mode (default) malformed lines are skipped and counted in
    ``stats.skipped_lines``; with strict=True the MalformedLine is
    re-raised annotated with its 1-based line number.
    """
    for lineno, text in enumerate(lines, start=1):
        stripped = text.strip()
        try:
            record = parse_line(text)
        except MalformedLine as exc:
            if strict:
                raise MalformedLine(f"line {lineno}: {exc}") from exc
            if stats is not None:
                stats.skipped_lines += 1
            continue
        if record is None:
            if stats is not None:
                if stripped.startswith("#"):
                    stats.comment_lines += 1
                else:
                    stats.blank_lines += 1
            continue
        if stats is not None:
            stats.sequences_parsed += 1
        yield record


def load_stripped(
    path,
    n_max: int = DEFAULT_N_MAX,
    strict: bool = False,
    snapshot_label: str | None = None,
) -> tuple[OccurrenceTable, IngestStats]:
    """Read a stripped file from disk and build its occurrence table."""
    path = Path(path)
    if snapshot_label is None:
        mtime = datetime.date.fromtimestamp(path.stat().st_mtime)
        snapshot_label = f"{path.name} ({mtime.isoformat()})"
    stats = IngestStats()
    with open(path) as fh:
        table = build_counts(
            iter_stripped(fh, strict=strict, stats=stats),
            n_max=n_max,
            snapshot_label=snapshot_label,
        )
    return table, stats
