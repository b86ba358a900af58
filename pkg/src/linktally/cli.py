"""Subcommand front end wiring ingestion through analysis.

Every stage reads and writes plain CSV files, so each is independently
testable and reruns are byte-identical: rows are explicitly sorted,
floats printed with a fixed format, and nothing timestamps its output.

Exit codes: 0 success, 1 validation problem in inputs or flags, 2 I/O
failure. Usage errors print to standard error.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import ExitStack
from importlib import resources
from pathlib import Path

from . import diversity, econ, ingest, rankshare, survival, tailfit
from .errors import LinkTallyError

DEFAULT_TOP_NS = (10, 50, 100, 500, 1000)
DEFAULT_RANK_NS = (1000, 10000, 1000000)


def _parse_ns(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"bad top-n list {text!r}") from None
    if not ns or any(n < 1 for n in ns):
        raise ValueError("top-n values must be positive integers")
    if ns != sorted(ns):
        raise ValueError("top-n values must be ascending")
    return ns


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out-dir", default=".", help="directory for output files (default: .)"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=42,
        help="master seed for simulation-based self checks; the analysis "
        "commands themselves are deterministic (default: 42)",
    )


def _read_counts_with_posts(args) -> list[ingest.MonthlyDomainCounts]:
    buckets = ingest.read_domain_counts(args.counts)
    stats_path = getattr(args, "stats", None)
    if stats_path is None:
        sibling = Path(args.counts).parent / "ingest-stats.json"
        stats_path = str(sibling) if sibling.exists() else None
    if stats_path is not None:
        _, by_month = ingest.read_ingest_stats(stats_path)
        for bucket in buckets:
            bucket.n_posts = by_month.get(bucket.month, 0)
    return buckets


def cmd_ingest(args) -> int:
    options = ingest.IngestOptions(
        created_field=args.created_field,
        body_field=args.body_field,
        keep_host=args.keep_host,
        dedupe_per_post=args.dedupe_per_post,
    )
    if args.retain_paths_for:
        fmap = diversity.load_function_map(args.retain_paths_for)
        hosts, paths = diversity.retention_for_map(fmap)
        options = ingest.IngestOptions(
            created_field=options.created_field,
            body_field=options.body_field,
            keep_host=options.keep_host,
            dedupe_per_post=options.dedupe_per_post,
            retained_hosts=hosts,
            retained_paths=paths,
        )
    buckets, stats = ingest.ingest_files(args.inputs, options, args.workers)
    out = _out_dir(args)
    ingest.write_domain_counts(buckets, str(out / "domain-counts.csv"))
    ingest.write_ingest_stats(stats, buckets, str(out / "ingest-stats.json"))
    print(
        f"posts={stats.posts_read} links={stats.links_extracted}"
        f" rejected={stats.urls_rejected}"
        f" malformed={stats.posts_skipped_malformed}"
        f" months={len(buckets)}"
    )
    return 0


def cmd_metrics(args) -> int:
    buckets = _read_counts_with_posts(args)
    top_ns = _parse_ns(args.top_ns)
    summaries = []
    for bucket in buckets:
        counts = bucket.counts
        if args.restrict_top:
            counts = diversity.restrict_top(counts, args.restrict_top)
            bucket = ingest.MonthlyDomainCounts(
                bucket.month, counts, bucket.n_posts, sum(counts.values())
            )
        summaries.append(diversity.summarize_month(bucket, top_ns))
    out = _out_dir(args)
    diversity.write_diversity_csv(summaries, str(out / "diversity.csv"), top_ns)
    return 0


def cmd_tailfit(args) -> int:
    buckets = ingest.read_domain_counts(args.counts)
    rows, notes = tailfit.fit_all_periods(
        buckets, granularity=args.granularity, exact=args.exact_zeta
    )
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    out = _out_dir(args)
    tailfit.write_tailfit_csv(rows, str(out / "tailfit.csv"), args.granularity)
    return 0


def cmd_survival(args) -> int:
    buckets = ingest.read_domain_counts(args.counts)
    cohorts = survival.assign_cohorts(buckets)
    if args.horizon_years is not None:
        horizon = args.horizon_years
    else:
        last_year = max(int(b.month[:4]) for b in buckets)
        first_year = min(c.birth_year for c in cohorts)
        horizon = max(last_year - first_year, 1)
    table = survival.survival_curve(cohorts, buckets, horizon, args.window)
    out = _out_dir(args)
    survival.write_survival_csv(table, str(out / "survival.csv"))
    return 0


def cmd_functions(args) -> int:
    buckets = ingest.read_domain_counts(args.counts)
    with ExitStack() as stack:
        if args.map is not None:
            map_path = args.map
        else:
            bundled = resources.files("linktally.data").joinpath("functions.tsv")
            map_path = str(stack.enter_context(resources.as_file(bundled)))
        fmap = diversity.load_function_map(map_path)
    series = diversity.function_attention(buckets, fmap)
    out = _out_dir(args)
    diversity.write_functions_csv(series, str(out / "functions.csv"))
    return 0


def cmd_econ(args) -> int:
    buckets = ingest.read_domain_counts(args.counts)
    attention = econ.series_from_counts(buckets, args.domain)
    value = econ.load_value_series(args.values, Path(args.values).stem)
    report = econ.run_two_step_pipeline(
        attention,
        value,
        max_lag=args.max_lag,
        regression=args.regression,
        difference_all=not args.no_difference_stationary,
    )
    out = _out_dir(args)
    econ.write_econ_csv(report, str(out / "econ.csv"))
    text = econ.report_text(report)
    with open(out / "econ-report.txt", "w", encoding="utf-8", newline="") as f:
        f.write(text)
    print(text, end="")
    return 0


def cmd_rankshare(args) -> int:
    ns = _parse_ns(args.top_ns)
    snapshots = [rankshare.load_rank_snapshot(path) for path in args.snapshots]
    out = _out_dir(args)
    rankshare.write_rankshare_csv(snapshots, ns, str(out / "rankshare.csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linktally",
        description="Tally outbound links in social-media post dumps and "
        "measure attention concentration, heavy tails, domain survival, "
        "and predictive power.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="fold post dumps into monthly domain counts")
    p.add_argument("inputs", nargs="+", help="NDJSON dump files (.gz/.bz2 ok)")
    p.add_argument("--created-field", default="created_utc")
    p.add_argument("--body-field", default="body")
    p.add_argument("--workers", type=int, default=1, help="one worker per file")
    p.add_argument(
        "--keep-host",
        action="store_true",
        help="keep full hosts instead of reducing to the registrable domain",
    )
    p.add_argument(
        "--dedupe-per-post",
        action="store_true",
        help="count repeated URLs within one post once",
    )
    p.add_argument(
        "--retain-paths-for",
        metavar="MAPFILE",
        help="keep the subdomain hosts and path prefixes named in this "
        "function map distinguishable in the counts",
    )
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("metrics", help="per-month concentration metrics")
    p.add_argument("counts", help="domain-counts CSV")
    p.add_argument("--stats", help="ingest stats JSON carrying per-month post totals")
    p.add_argument(
        "--top-ns", default=",".join(str(n) for n in DEFAULT_TOP_NS),
        help="comma-separated share sizes (default: 10,50,100,500,1000)",
    )
    p.add_argument(
        "--restrict-top",
        type=int,
        metavar="K",
        help="restrict each month to its K most-linked domains first",
    )
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("tailfit", help="heavy-tail fits per period")
    p.add_argument("counts", help="domain-counts CSV")
    p.add_argument("--granularity", choices=("year", "month"), default="year")
    p.add_argument(
        "--exact-zeta",
        action="store_true",
        help="use the exact discrete likelihood instead of the "
        "half-offset approximation",
    )
    _add_common(p)
    p.set_defaults(func=cmd_tailfit)

    p = sub.add_parser("survival", help="birth-year cohort survival curves")
    p.add_argument("counts", help="domain-counts CSV")
    p.add_argument(
        "--horizon-years",
        type=int,
        help="maximum age to report (default: corpus span)",
    )
    p.add_argument("--window", choices=("calendar", "rolling"), default="calendar")
    _add_common(p)
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("functions", help="per-function attention series")
    p.add_argument("counts", help="domain-counts CSV")
    p.add_argument("--map", help="function map TSV (default: bundled)")
    _add_common(p)
    p.set_defaults(func=cmd_functions)

    p = sub.add_parser("econ", help="two-step attention/value analysis")
    p.add_argument("counts", help="domain-counts CSV for the attention series")
    p.add_argument("values", help="month,value CSV for the value series")
    p.add_argument(
        "--domain",
        help="track this domain's monthly count (default: total links)",
    )
    p.add_argument("--max-lag", type=int, default=12)
    p.add_argument(
        "--regression", choices=("constant", "constant+trend"), default="constant"
    )
    p.add_argument(
        "--no-difference-stationary",
        action="store_true",
        help="leave series that already pass the unit-root test undifferenced",
    )
    _add_common(p)
    p.set_defaults(func=cmd_econ)

    p = sub.add_parser("rankshare", help="top-n mass of rank snapshots")
    p.add_argument("snapshots", nargs="+", help="domain,pagerank CSV files")
    p.add_argument(
        "--top-ns", default=",".join(str(n) for n in DEFAULT_RANK_NS),
        help="comma-separated sizes (default: 1000,10000,1000000)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_rankshare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LinkTallyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
