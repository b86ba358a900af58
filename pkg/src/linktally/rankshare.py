"""Top-n mass of externally computed rank snapshots.

A snapshot lists domains with a nonnegative rank weight for one period.
Real snapshots are usually truncated to the top k domains and rarely sum
to exactly one, so mass is always reported relative to the observed
total; whether the snapshot looked normalized on load is recorded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateDomain, EmptySnapshot, ParseError


@dataclass
class RankSnapshot:
    """One period's domain weights; normalized means the total was within
    1% of one when loaded."""

    period: str
    entries: list[tuple[str, float]]
    total_mass: float
    normalized: bool


def load_rank_snapshot(path: str, period: str | None = None) -> RankSnapshot:
    """Read a domain,pagerank CSV; the period label defaults to the file stem."""
    entries: list[tuple[str, float]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["domain", "pagerank"]:
            raise ParseError(f"{path}: expected header domain,pagerank")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 fields")
            domain, weight_text = row
            if not domain:
                raise ParseError(f"{path}:{lineno}: empty domain")
            if domain in seen:
                raise DuplicateDomain(f"{path}:{lineno}: {domain!r} repeated")
            try:
                weight = float(weight_text)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: bad pagerank {weight_text!r}"
                ) from None
            if not math.isfinite(weight) or weight < 0:
                raise ParseError(f"{path}:{lineno}: pagerank must be finite and >= 0")
            seen.add(domain)
            entries.append((domain, weight))
    total = math.fsum(w for _, w in entries)
    normalized = 0.99 <= total <= 1.01
    return RankSnapshot(period or Path(path).stem, entries, total, normalized)


def top_n_rank_mass(snapshot: RankSnapshot, n: int) -> float:
    """Fraction of total rank mass held by the n heaviest domains.

    Equal weights are ordered by domain name; exactly 1.0 once n covers
    every entry.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not snapshot.entries:
        raise EmptySnapshot(f"{snapshot.period}: no entries")
    if snapshot.total_mass <= 0:
        raise EmptySnapshot(f"{snapshot.period}: total mass is zero")
    ordered = sorted(snapshot.entries, key=lambda e: (-e[1], e[0]))
    top = math.fsum(w for _, w in ordered[:n])
    if n >= len(ordered):
        return 1.0
    return top / snapshot.total_mass


def write_rankshare_csv(
    snapshots: list[RankSnapshot], ns: list[int], path: str
) -> None:
    """One row per period and n: period,n,mass, in input order then n ascending."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["period", "n", "mass"])
        for snapshot in snapshots:
            for n in sorted(ns):
                writer.writerow(
                    [snapshot.period, n, "%.10g" % top_n_rank_mass(snapshot, n)]
                )
