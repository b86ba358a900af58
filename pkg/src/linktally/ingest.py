"""Streaming ingestion of newline-delimited JSON post dumps.

Each input line is one JSON object holding at least a creation timestamp
and a text body (field names configurable). The stream folds into one
bucket per UTC calendar month, counting links per normalized domain.
Corrupt lines are counted and skipped, never fatal; at dump scale some
always exist.

Buckets from independent files merge commutatively, so multi-file runs
fan out one worker process per file and combine partial results without
changing any count. The domain-counts CSV written here, with its fixed
header and sort order, is the contract every analysis stage consumes.
"""

from __future__ import annotations

import bz2
import csv
import gzip
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Iterable, Iterator

from . import domains
from .errors import MalformedUrl, MonthMismatch, ParseError

_MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")


@dataclass
class MonthlyDomainCounts:
    """Link tallies for one calendar month.

    Any domain present in counts was linked at least once and is by
    definition active in this month. n_links always equals the sum of
    counts; n_posts covers every post seen in the month, linkless ones
    included.
    """

    month: str
    counts: dict[str, int] = field(default_factory=dict)
    n_posts: int = 0
    n_links: int = 0


@dataclass
class IngestStats:
    """Counters over one ingestion run.

    links_extracted always equals the links recorded in buckets plus
    urls_rejected, so nothing extracted goes missing silently.
    """

    posts_read: int = 0
    links_extracted: int = 0
    urls_rejected: int = 0
    posts_skipped_malformed: int = 0

    def add(self, other: "IngestStats") -> None:
        self.posts_read += other.posts_read
        self.links_extracted += other.links_extracted
        self.urls_rejected += other.urls_rejected
        self.posts_skipped_malformed += other.posts_skipped_malformed


@dataclass(frozen=True)
class IngestOptions:
    """Knobs for one ingestion run; immutable so worker processes share it.

    retained_hosts keeps the named hosts verbatim instead of reducing them
    to the registrable domain, so subdomain patterns in a function map stay
    distinguishable. retained_paths maps a registrable domain to path
    prefixes recorded as separate "domain/prefix" keys; links matching a
    prefix count toward that key instead of the bare domain.
    """

    created_field: str = "created_utc"
    body_field: str = "body"
    keep_host: bool = False
    dedupe_per_post: bool = False
    retained_hosts: frozenset[str] = frozenset()
    retained_paths: tuple[tuple[str, tuple[str, ...]], ...] = ()


def ingest_stream(
    source: Iterable[bytes], options: IngestOptions = IngestOptions()
) -> tuple[list[MonthlyDomainCounts], IngestStats]:
    """Fold one newline-delimited JSON byte stream into monthly buckets.

    *source* is any iterable of byte lines; an open binary file works.
    Returns buckets sorted by month plus the run counters. Unreadable
    sources raise OSError; malformed lines are only counted.
    """
    created_field = options.created_field
    body_field = options.body_field
    dedupe = options.dedupe_per_post
    keep_host = options.keep_host
    retained = options.retained_hosts if not keep_host else frozenset()
    path_rules = dict(options.retained_paths) if not keep_host else {}

    buckets: dict[str, MonthlyDomainCounts] = {}
    stats = IngestStats()
    host_keys: dict[str, str] = {}

    for line in source:
        if not line or line.isspace():
            continue
        try:
            post = json.loads(line)
            created = post[created_field]
            body = post[body_field]
        except (ValueError, KeyError, TypeError):
            stats.posts_skipped_malformed += 1
            continue
        if isinstance(created, str):
            try:
                created = float(created)
            except ValueError:
                stats.posts_skipped_malformed += 1
                continue
        if (
            isinstance(created, bool)
            or not isinstance(created, (int, float))
            or created < 0
            or not isinstance(body, str)
        ):
            stats.posts_skipped_malformed += 1
            continue
        month = domains.bucket_month(created)
        bucket = buckets.get(month)
        if bucket is None:
            bucket = buckets[month] = MonthlyDomainCounts(month)
        stats.posts_read += 1
        bucket.n_posts += 1
        if "http" not in body:
            continue
        urls = domains.extract_urls(body)
        if not urls:
            continue
        if dedupe and len(urls) > 1:
            urls = list(dict.fromkeys(urls))
        stats.links_extracted += len(urls)
        counts = bucket.counts
        for url in urls:
            try:
                host = domains.host_of(url)
            except MalformedUrl:
                stats.urls_rejected += 1
                continue
            key = host_keys.get(host)
            if key is None:
                if host in retained:
                    key = host
                elif host.startswith("www.") and host[4:] in retained:
                    key = host[4:]
                else:
                    key = domains.reduce_host(host, keep_host)
                host_keys[host] = key
            if path_rules:
                prefixes = path_rules.get(key)
                if prefixes:
                    path = domains.path_of(url)
                    for prefix in prefixes:
                        if path == prefix or path.startswith(prefix + "/"):
                            key = key + prefix
                            break
            counts[key] = counts.get(key, 0) + 1
            bucket.n_links += 1
    return [buckets[m] for m in sorted(buckets)], stats


def open_dump(path: str):
    """Open a dump file for binary reading, transparently decompressing
    gzip and bzip2 inputs (detected by magic bytes, not file name)."""
    with open(path, "rb") as probe:
        head = probe.read(3)
    if head[:2] == b"\x1f\x8b":
        return gzip.open(path, "rb")
    if head == b"BZh":
        return bz2.open(path, "rb")
    return open(path, "rb")


def ingest_path(
    path: str, options: IngestOptions = IngestOptions()
) -> tuple[list[MonthlyDomainCounts], IngestStats]:
    """Ingest one dump file."""
    with open_dump(path) as f:
        return ingest_stream(f, options)


def merge_counts(a: MonthlyDomainCounts, b: MonthlyDomainCounts) -> MonthlyDomainCounts:
    """Combine two buckets for the same month; commutative and associative."""
    if a.month != b.month:
        raise MonthMismatch(f"cannot merge months {a.month} and {b.month}")
    counts = dict(a.counts)
    for domain, count in b.counts.items():
        counts[domain] = counts.get(domain, 0) + count
    return MonthlyDomainCounts(
        a.month, counts, a.n_posts + b.n_posts, a.n_links + b.n_links
    )


def _ingest_one(path: str, options: IngestOptions):
    return ingest_path(path, options)


def ingest_files(
    paths: list[str], options: IngestOptions = IngestOptions(), workers: int = 1
) -> tuple[list[MonthlyDomainCounts], IngestStats]:
    """Ingest several dump files, optionally one worker process per file,
    and merge the partial buckets into one sorted list."""
    if workers <= 1 or len(paths) <= 1:
        results = [ingest_path(p, options) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_ingest_one, paths, repeat(options)))
    merged: dict[str, MonthlyDomainCounts] = {}
    total = IngestStats()
    for buckets, stats in results:
        total.add(stats)
        for bucket in buckets:
            current = merged.get(bucket.month)
            merged[bucket.month] = (
                bucket if current is None else merge_counts(current, bucket)
            )
    return [merged[m] for m in sorted(merged)], total


def write_domain_counts(buckets: Iterable[MonthlyDomainCounts], path: str) -> None:
    """Write the domain-counts contract file.

    Header is exactly month,domain,count; rows sorted by month ascending,
    then count descending, then domain ascending; UTF-8 with LF endings.
    """
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["month", "domain", "count"])
        for bucket in sorted(buckets, key=lambda b: b.month):
            rows = sorted(bucket.counts.items(), key=lambda kv: (-kv[1], kv[0]))
            for domain, count in rows:
                writer.writerow([bucket.month, domain, count])


def read_domain_counts(path: str) -> list[MonthlyDomainCounts]:
    """Read a domain-counts file back into monthly buckets.

    Post totals are not part of the contract file, so n_posts comes back 0;
    the ingest stats sidecar carries them when available.
    """
    out: dict[str, MonthlyDomainCounts] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["month", "domain", "count"]:
            raise ParseError(f"{path}: expected header month,domain,count")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            month, domain, count_text = row
            if not _MONTH_RE.match(month):
                raise ParseError(f"{path}:{lineno}: bad month {month!r}")
            if not domain:
                raise ParseError(f"{path}:{lineno}: empty domain")
            try:
                count = int(count_text)
            except ValueError:
                count = 0
            if count < 1:
                raise ParseError(f"{path}:{lineno}: bad count {count_text!r}")
            bucket = out.setdefault(month, MonthlyDomainCounts(month))
            if domain in bucket.counts:
                raise ParseError(f"{path}:{lineno}: duplicate domain {domain!r}")
            bucket.counts[domain] = count
            bucket.n_links += count
    return [out[m] for m in sorted(out)]


def write_ingest_stats(
    stats: IngestStats, buckets: Iterable[MonthlyDomainCounts], path: str
) -> None:
    """Write the ingest stats sidecar: run counters plus per-month post
    totals, which the contract CSV does not carry."""
    payload = {
        "posts_read": stats.posts_read,
        "links_extracted": stats.links_extracted,
        "urls_rejected": stats.urls_rejected,
        "posts_skipped_malformed": stats.posts_skipped_malformed,
        "n_posts_by_month": {b.month: b.n_posts for b in buckets},
    }
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_ingest_stats(path: str) -> tuple[IngestStats, dict[str, int]]:
    """Read the stats sidecar back; returns counters and per-month posts."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            payload = json.load(f)
        except ValueError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    try:
        stats = IngestStats(
            posts_read=int(payload["posts_read"]),
            links_extracted=int(payload["links_extracted"]),
            urls_rejected=int(payload["urls_rejected"]),
            posts_skipped_malformed=int(payload["posts_skipped_malformed"]),
        )
        by_month = {
            str(k): int(v) for k, v in payload["n_posts_by_month"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: missing or bad field: {exc}") from exc
    return stats, by_month
