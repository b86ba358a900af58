"""Per-month concentration and diversity metrics over domain counts.

The unit of analysis is one month's map from domain to link count. Shares
are counts divided by total links; the concentration index is the sum of
squared shares, ranging from 1/N for an even split over N domains to 1
for a monopoly. Originality is active domains per link, the inverse of
mean attention per domain. Moment statistics describe the shape of the
per-domain count distribution itself.

A function map groups services by the consumer need they serve and lets
link counts be attributed per function. Patterns may name a registrable
domain, a specific host, or a host plus path prefix; path patterns only
match counts from an ingest run that retained those prefixes.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import domains
from .errors import DegenerateSample, EmptyMonth, ParseError
from .ingest import MonthlyDomainCounts


def _total(counts: Mapping[str, int]) -> int:
    total = sum(counts.values())
    if total <= 0:
        raise EmptyMonth("month has no links")
    return total


def hhi(counts: Mapping[str, int]) -> float:
    """Sum of squared link shares over active domains.

    1/N when N domains split the links evenly; 1 when a single domain
    attracts them all.
    """
    total = _total(counts)
    return math.fsum((c / total) ** 2 for c in counts.values())


def link_originality(counts: Mapping[str, int]) -> float:
    """Active domains divided by links: 1 when every link hits a distinct
    domain, approaching 0 as attention piles onto few domains."""
    return len(counts) / _total(counts)


def top_n_share(counts: Mapping[str, int], n: int) -> float:
    """Fraction of all links going to the n most-linked domains.

    Equal counts are ordered by domain name ascending so the result never
    depends on dict ordering. Exactly 1.0 once n covers every domain.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    total = _total(counts)
    if n >= len(counts):
        return 1.0
    top = heapq.nsmallest(n, counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return sum(c for _, c in top) / total


def moment_stats(counts: Mapping[str, int]) -> tuple[float, float]:
    """Sample skewness and excess kurtosis of the per-domain counts.

    Central moments use the 1/N convention without bias correction:
    g1 = m3 / m2^(3/2), g2 = m4 / m2^2 - 3.
    """
    values = np.fromiter(counts.values(), dtype=float)
    if values.size < 3:
        raise DegenerateSample(f"need at least 3 domains, got {values.size}")
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateSample("all counts equal, zero variance")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return m3 / m2**1.5, m4 / (m2 * m2) - 3.0


def restrict_top(counts: Mapping[str, int], k: int) -> dict[str, int]:
    """Keep only the k most-linked domains (ties by domain name), for
    sensitivity runs that bound noise from the long tail."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= len(counts):
        return dict(counts)
    top = heapq.nsmallest(k, counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return dict(top)


@dataclass
class DiversitySummary:
    """One month's concentration scalars; moments are None when the count
    distribution is degenerate (fewer than 3 domains or zero variance)."""

    month: str
    n_posts: int
    n_links: int
    n_active_domains: int
    hhi: float
    originality: float
    skewness: float | None
    excess_kurtosis: float | None
    top_shares: dict[int, float]


def summarize_month(
    bucket: MonthlyDomainCounts, top_ns: Iterable[int] = (10, 50, 100, 500, 1000)
) -> DiversitySummary:
    """Compute every per-month metric in one pass over the bucket."""
    counts = bucket.counts
    total = _total(counts)
    try:
        skew, kurt = moment_stats(counts)
    except DegenerateSample:
        skew, kurt = None, None
    return DiversitySummary(
        month=bucket.month,
        n_posts=bucket.n_posts,
        n_links=total,
        n_active_domains=len(counts),
        hhi=hhi(counts),
        originality=len(counts) / total,
        skewness=skew,
        excess_kurtosis=kurt,
        top_shares={n: top_n_share(counts, n) for n in top_ns},
    )


@dataclass(frozen=True)
class FunctionEntry:
    pattern: str
    function: str
    company: str
    year_started: int


@dataclass
class FunctionMap:
    """Service patterns grouped by consumer function, in file order."""

    entries: list[FunctionEntry]

    @property
    def functions(self) -> list[str]:
        seen: dict[str, None] = {}
        for entry in self.entries:
            seen.setdefault(entry.function, None)
        return list(seen)


def load_function_map(path: str) -> FunctionMap:
    """Parse a function map TSV: pattern, function, company, year started.

    Lines starting with '#' and blank lines are ignored. Patterns must be
    unique and function labels non-empty.
    """
    entries: list[FunctionEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 tab-separated fields")
            pattern, function, company, year_text = (f.strip() for f in fields)
            pattern = pattern.lower()
            if not pattern:
                raise ParseError(f"{path}:{lineno}: empty pattern")
            if pattern in seen:
                raise ParseError(f"{path}:{lineno}: duplicate pattern {pattern!r}")
            if not function:
                raise ParseError(f"{path}:{lineno}: empty function label")
            try:
                year = int(year_text)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: bad year {year_text!r}"
                ) from None
            seen.add(pattern)
            entries.append(FunctionEntry(pattern, function, company, year))
    return FunctionMap(entries)


def _split_pattern(pattern: str) -> tuple[str, str]:
    if "/" in pattern:
        host, _, path = pattern.partition("/")
        return host, "/" + path.rstrip("/")
    return pattern, ""


def _strip_www(host: str) -> str:
    if host.startswith("www.") and len(host) > 4:
        return host[4:]
    return host


def pattern_keys(fmap: FunctionMap) -> dict[str, frozenset[str]]:
    """Resolve each pattern to the count-map keys it matches.

    A pattern reduces to a canonical registrable domain. When no other
    pattern shares that canonical domain, the pattern matches the domain
    key plus its own host forms. When several patterns collide on one
    canonical domain (distinct services on subdomains of one operator),
    only the bare or www form keeps the domain key; subdomain patterns
    match their exact host, which requires a host-retaining ingest run.
    Host+path patterns match their "domain/prefix" key only.
    """
    parsed: list[tuple[FunctionEntry, str, str, str]] = []
    claims: dict[str, int] = {}
    for entry in fmap.entries:
        host, prefix = _split_pattern(entry.pattern)
        stripped = _strip_www(host)
        canon = domains.reduce_host(stripped)
        parsed.append((entry, stripped, canon, prefix))
        if not prefix:
            claims[canon] = claims.get(canon, 0) + 1
    keys: dict[str, frozenset[str]] = {}
    for entry, stripped, canon, prefix in parsed:
        if prefix:
            keys[entry.pattern] = frozenset({canon + prefix})
        elif stripped == canon or claims[canon] == 1:
            keys[entry.pattern] = frozenset({canon, "www." + canon, stripped})
        else:
            keys[entry.pattern] = frozenset({stripped})
    return keys


@dataclass
class FunctionAttentionSeries:
    """Per-month link totals for one function; months with zero links are
    absent, and first_seen is None when the function never appears."""

    function: str
    totals: dict[str, int]
    first_seen: str | None


def function_attention(
    monthly: Iterable[MonthlyDomainCounts], fmap: FunctionMap
) -> list[FunctionAttentionSeries]:
    """Sum link counts per function per month.

    A link counts toward every function with a matching pattern, so the
    series are independent tallies, not a partition.
    """
    monthly = list(monthly)
    keys = pattern_keys(fmap)
    out: list[FunctionAttentionSeries] = []
    for function in fmap.functions:
        match: set[str] = set()
        for entry in fmap.entries:
            if entry.function == function:
                match |= keys[entry.pattern]
        totals: dict[str, int] = {}
        for bucket in monthly:
            total = sum(bucket.counts.get(k, 0) for k in sorted(match))
            if total:
                totals[bucket.month] = total
        first_seen = min(totals) if totals else None
        out.append(FunctionAttentionSeries(function, totals, first_seen))
    return out


def retention_for_map(
    fmap: FunctionMap,
) -> tuple[frozenset[str], tuple[tuple[str, tuple[str, ...]], ...]]:
    """Derive ingest retention directives from a function map: subdomain
    patterns become retained hosts, path patterns become retained prefixes
    keyed by registrable domain."""
    hosts: set[str] = set()
    paths: dict[str, set[str]] = {}
    for entry in fmap.entries:
        host, prefix = _split_pattern(entry.pattern)
        stripped = _strip_www(host)
        canon = domains.reduce_host(stripped)
        if prefix:
            paths.setdefault(canon, set()).add(prefix)
        elif stripped != canon:
            hosts.add(stripped)
    frozen_paths = tuple(
        (domain, tuple(sorted(prefixes))) for domain, prefixes in sorted(paths.items())
    )
    return frozenset(hosts), frozen_paths


def _fmt(value: float | None) -> str:
    return "" if value is None else "%.10g" % value


def write_diversity_csv(
    summaries: Iterable[DiversitySummary],
    path: str,
    top_ns: Iterable[int] = (10, 50, 100, 500, 1000),
) -> None:
    """Write one row per month, sorted by month; floats carry 10 significant
    digits and degenerate moments are left empty."""
    top_ns = list(top_ns)
    header = [
        "month",
        "n_posts",
        "n_links",
        "n_active_domains",
        "hhi",
        "originality",
        "skewness",
        "excess_kurtosis",
    ] + [f"top{n}" for n in top_ns]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for s in sorted(summaries, key=lambda s: s.month):
            writer.writerow(
                [
                    s.month,
                    s.n_posts,
                    s.n_links,
                    s.n_active_domains,
                    _fmt(s.hhi),
                    _fmt(s.originality),
                    _fmt(s.skewness),
                    _fmt(s.excess_kurtosis),
                ]
                + [_fmt(s.top_shares[n]) for n in top_ns]
            )


def write_functions_csv(
    series: Iterable[FunctionAttentionSeries], path: str
) -> None:
    """Write per-function monthly totals: function,month,links with functions
    in map-file order and months ascending; zero-total functions have no rows."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["function", "month", "links"])
        for s in series:
            for month in sorted(s.totals):
                writer.writerow([s.function, month, s.totals[month]])
