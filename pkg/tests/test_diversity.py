"""Concentration metrics, moment statistics, and function-map attribution."""

from __future__ import annotations

import importlib.resources
import math

import numpy as np
import pytest
import scipy.stats

from linktally.diversity import (
    DiversitySummary,
    FunctionEntry,
    FunctionMap,
    function_attention,
    hhi,
    link_originality,
    load_function_map,
    moment_stats,
    pattern_keys,
    restrict_top,
    retention_for_map,
    summarize_month,
    top_n_share,
    write_diversity_csv,
    write_functions_csv,
)
from linktally.errors import DegenerateSample, EmptyMonth, ParseError
from linktally.ingest import MonthlyDomainCounts, merge_counts


def bundled_map_path():
    res = importlib.resources.files("linktally").joinpath("data/functions.tsv")
    return importlib.resources.as_file(res)


def _random_counts(rng, n_max=100, c_max=50):
    n = int(rng.integers(1, n_max + 1))
    return {f"d{i}.com": int(rng.integers(1, c_max + 1)) for i in range(n)}


# -- concentration index ----------------------------------------------------

def test_hhi_monopoly():
    assert hhi({"only.com": 7}) == 1.0


def test_hhi_even_split_power_of_two():
    assert hhi({"a": 3, "b": 3, "c": 3, "d": 3}) == 0.25


def test_hhi_hand_computed():
    # shares 1/4, 1/4, 1/2 -> 1/16 + 1/16 + 1/4
    assert hhi({"a": 1, "b": 1, "c": 2}) == 0.375


def test_hhi_bounds_random():
    rng = np.random.default_rng(31)
    for _ in range(200):
        counts = _random_counts(rng)
        h = hhi(counts)
        assert 1 / len(counts) - 1e-12 <= h <= 1.0


def test_hhi_equality_both_directions():
    rng = np.random.default_rng(37)
    for _ in range(100):
        counts = _random_counts(rng, n_max=40, c_max=20)
        n = len(counts)
        even = {d: 5 for d in counts}
        assert math.isclose(hhi(even), 1 / n, rel_tol=1e-12)
        if n > 1 and len(set(counts.values())) > 1:
            # uneven split sits strictly inside the interval
            h = hhi(counts)
            assert h > 1 / n + 1e-12
            assert h < 1.0


def test_hhi_scale_invariant():
    counts = {"a": 4, "b": 7, "c": 1}
    tripled = {d: 3 * c for d, c in counts.items()}
    assert hhi(counts) == hhi(tripled)


def test_hhi_empty_month():
    with pytest.raises(EmptyMonth):
        hhi({})


# -- originality ------------------------------------------------------------

def test_originality_examples():
    assert link_originality({"a": 1, "b": 1}) == 1.0
    assert link_originality({"a": 4}) == 0.25
    assert link_originality({"a": 2, "b": 1, "c": 1}) == 0.75


def test_originality_integer_identity():
    rng = np.random.default_rng(41)
    for _ in range(200):
        counts = _random_counts(rng)
        n_links = sum(counts.values())
        orig = link_originality(counts)
        assert 0 < orig <= 1.0
        assert round(orig * n_links) == len(counts)


# -- top-n share ------------------------------------------------------------

def test_top_n_share_examples():
    counts = {"a": 5, "b": 3, "c": 2}
    assert top_n_share(counts, 1) == 0.5
    assert top_n_share(counts, 2) == 0.8
    assert top_n_share(counts, 3) == 1.0
    assert top_n_share(counts, 50) == 1.0


def test_top_n_share_monotone():
    rng = np.random.default_rng(43)
    counts = _random_counts(rng, n_max=30)
    shares = [top_n_share(counts, n) for n in range(1, 35)]
    assert all(a <= b + 1e-15 for a, b in zip(shares, shares[1:]))
    assert shares[-1] == 1.0


def test_top_n_share_tie_breaks_by_name():
    counts = {"b.com": 2, "a.com": 2, "c.com": 1}
    assert top_n_share(counts, 1) == 0.4  # a.com wins the tie


def test_top_n_share_rejects_bad_n():
    with pytest.raises(ValueError):
        top_n_share({"a": 1}, 0)


# -- moment statistics ------------------------------------------------------

def test_moments_hand_computed():
    # values {1,1,1,5}: m2=3, m3=6, m4=21
    skew, kurt = moment_stats({"a": 1, "b": 1, "c": 1, "d": 5})
    assert skew == pytest.approx(2 / math.sqrt(3), rel=1e-14)
    assert kurt == pytest.approx(21 / 9 - 3, rel=1e-14)


def test_moments_symmetric_is_zero_skew():
    skew, kurt = moment_stats({"a": 1, "b": 2, "c": 3})
    assert skew == 0.0
    assert kurt == pytest.approx(-1.5, rel=1e-12)


def test_moments_match_scipy():
    rng = np.random.default_rng(47)
    for _ in range(50):
        counts = _random_counts(rng, n_max=60)
        if len(counts) < 3 or len(set(counts.values())) == 1:
            continue
        values = np.array(list(counts.values()), dtype=float)
        skew, kurt = moment_stats(counts)
        assert skew == pytest.approx(scipy.stats.skew(values), rel=1e-12)
        assert kurt == pytest.approx(
            scipy.stats.kurtosis(values, fisher=True, bias=True), rel=1e-12
        )


def test_moments_degenerate():
    with pytest.raises(DegenerateSample):
        moment_stats({"a": 1, "b": 2})
    with pytest.raises(DegenerateSample):
        moment_stats({"a": 3, "b": 3, "c": 3})


# -- restriction ------------------------------------------------------------

def test_restrict_top():
    counts = {"a": 5, "b": 3, "c": 2, "d": 2}
    assert restrict_top(counts, 2) == {"a": 5, "b": 3}
    assert restrict_top(counts, 3) == {"a": 5, "b": 3, "c": 2}  # c before d
    full = restrict_top(counts, 9)
    assert full == counts
    full["z"] = 1
    assert "z" not in counts  # copy, not a view
    with pytest.raises(ValueError):
        restrict_top(counts, 0)


# -- month summaries --------------------------------------------------------

def test_summarize_month_composes():
    bucket = MonthlyDomainCounts(
        "2017-01", {"a": 5, "b": 3, "c": 2}, n_posts=6, n_links=10
    )
    s = summarize_month(bucket, top_ns=(1, 2))
    assert s.month == "2017-01"
    assert s.n_posts == 6
    assert s.n_links == 10
    assert s.n_active_domains == 3
    assert s.hhi == hhi(bucket.counts)
    assert s.originality == 0.3
    assert s.top_shares == {1: 0.5, 2: 0.8}
    assert s.skewness is not None


def test_summarize_month_degenerate_moments_are_none():
    s = summarize_month(MonthlyDomainCounts("2017-01", {"a": 2, "b": 2}, 1, 4))
    assert s.skewness is None
    assert s.excess_kurtosis is None
    assert s.hhi == 0.5


def test_summarize_empty_month_raises():
    with pytest.raises(EmptyMonth):
        summarize_month(MonthlyDomainCounts("2017-01", {}, 3, 0))


def test_summary_consistent_under_merge():
    a = MonthlyDomainCounts("2017-01", {"a": 2, "b": 1}, 2, 3)
    b = MonthlyDomainCounts("2017-01", {"b": 4, "c": 1}, 1, 5)
    merged = summarize_month(merge_counts(a, b))
    direct = summarize_month(MonthlyDomainCounts("2017-01", {"a": 2, "b": 5, "c": 1}, 3, 8))
    assert merged == direct


# -- function maps ----------------------------------------------------------

def test_load_bundled_map():
    with bundled_map_path() as p:
        fmap = load_function_map(str(p))
    assert len(fmap.entries) == 48
    assert len(fmap.functions) == 12
    assert fmap.functions[0] == "Video"  # file order preserved
    patterns = [e.pattern for e in fmap.entries]
    assert len(set(patterns)) == len(patterns)
    assert all(1900 < e.year_started < 2030 for e in fmap.entries)


@pytest.mark.parametrize(
    "content",
    [
        "a.com\tVideo\tA\n",                      # 3 fields
        "a.com\tVideo\tA\t2004\na.com\tVideo\tB\t2005\n",  # duplicate
        "a.com\t\tA\t2004\n",                     # empty function
        "a.com\tVideo\tA\tsoon\n",                # bad year
        "\tVideo\tA\t2004\n",                     # empty pattern
    ],
)
def test_load_function_map_rejects(tmp_path, content):
    p = tmp_path / "map.tsv"
    p.write_text(content)
    with pytest.raises(ParseError):
        load_function_map(str(p))


def test_load_function_map_normalizes(tmp_path):
    p = tmp_path / "map.tsv"
    p.write_text("# comment\n\nWWW.Vimeo.COM\tVideo\tVimeo\t2004\n")
    fmap = load_function_map(str(p))
    assert fmap.entries == [FunctionEntry("www.vimeo.com", "Video", "Vimeo", 2004)]


def _mini_map(*rows):
    return FunctionMap([FunctionEntry(*r) for r in rows])


def test_pattern_keys_uncontested_domain():
    fmap = _mini_map(("vimeo.com", "Video", "Vimeo", 2004))
    assert pattern_keys(fmap)["vimeo.com"] == frozenset({"vimeo.com", "www.vimeo.com"})


def test_pattern_keys_uncontested_subdomain_matches_domain_too():
    fmap = _mini_map(("hello.simfy.de", "Music streaming", "simfy", 2006))
    assert pattern_keys(fmap)["hello.simfy.de"] == frozenset(
        {"simfy.de", "www.simfy.de", "hello.simfy.de"}
    )


def test_pattern_keys_contested_subdomains_are_exact():
    fmap = _mini_map(
        ("drive.google.com", "Filesharing", "Google Drive", 2012),
        ("www.google.com", "Search", "Google", 1998),
        ("plus.google.com", "Social Network", "Google Plus", 1998),
    )
    keys = pattern_keys(fmap)
    assert keys["drive.google.com"] == frozenset({"drive.google.com"})
    assert keys["plus.google.com"] == frozenset({"plus.google.com"})
    # the www form holds the registrable-domain key
    assert keys["www.google.com"] == frozenset({"google.com", "www.google.com"})


def test_pattern_keys_path_pattern():
    fmap = _mini_map(
        ("amazon.com", "General Retail", "Amazon", 1994),
        ("amazon.com/video", "Movies", "Amazon video", 2006),
    )
    keys = pattern_keys(fmap)
    assert keys["amazon.com"] == frozenset({"amazon.com", "www.amazon.com"})
    assert keys["amazon.com/video"] == frozenset({"amazon.com/video"})


def test_function_attention_example():
    fmap = _mini_map(
        ("www.uber.com", "Ride sharing", "Uber", 2009),
        ("www.lyft.com", "Ride sharing", "Lyft", 2007),
    )
    bucket = MonthlyDomainCounts(
        "2017-01", {"uber.com": 3, "lyft.com": 2, "etsy.com": 9}, 5, 14
    )
    series = function_attention([bucket], fmap)
    assert len(series) == 1
    assert series[0].function == "Ride sharing"
    assert series[0].totals == {"2017-01": 5}
    assert series[0].first_seen == "2017-01"


def test_function_attention_overlap_counts_twice():
    fmap = _mini_map(
        ("amazon.com", "General Retail", "Amazon", 1994),
        ("amazon.com/video", "Movies", "Amazon video", 2006),
    )
    bucket = MonthlyDomainCounts(
        "2017-01", {"amazon.com": 4, "amazon.com/video": 3}, 2, 7
    )
    retail, movies = function_attention([bucket], fmap)
    assert retail.totals == {"2017-01": 4}
    assert movies.totals == {"2017-01": 3}


def test_function_attention_zero_months_absent():
    fmap = _mini_map(("vimeo.com", "Video", "Vimeo", 2004))
    buckets = [
        MonthlyDomainCounts("2017-01", {"other.com": 2}, 1, 2),
        MonthlyDomainCounts("2017-02", {"vimeo.com": 1}, 1, 1),
    ]
    (series,) = function_attention(buckets, fmap)
    assert series.totals == {"2017-02": 1}
    assert series.first_seen == "2017-02"


def test_function_attention_never_seen():
    fmap = _mini_map(("vimeo.com", "Video", "Vimeo", 2004))
    (series,) = function_attention([MonthlyDomainCounts("2017-01", {"x.com": 1}, 1, 1)], fmap)
    assert series.totals == {}
    assert series.first_seen is None


def test_retention_for_map():
    fmap = _mini_map(
        ("vimeo.com", "Video", "Vimeo", 2004),
        ("plus.google.com", "Social Network", "Google Plus", 1998),
        ("www.uber.com", "Ride sharing", "Uber", 2009),
        ("amazon.com/video", "Movies", "Amazon video", 2006),
    )
    hosts, paths = retention_for_map(fmap)
    assert hosts == frozenset({"plus.google.com"})
    assert paths == (("amazon.com", ("/video",)),)


# -- CSV output -------------------------------------------------------------

def test_write_diversity_csv_bytes(tmp_path):
    s = DiversitySummary(
        month="2017-01",
        n_posts=6,
        n_links=10,
        n_active_domains=3,
        hhi=0.38,
        originality=0.3,
        skewness=None,
        excess_kurtosis=None,
        top_shares={1: 0.5, 2: 0.8},
    )
    out = tmp_path / "diversity.csv"
    write_diversity_csv([s], str(out), top_ns=(1, 2))
    assert out.read_bytes() == (
        b"month,n_posts,n_links,n_active_domains,hhi,originality,"
        b"skewness,excess_kurtosis,top1,top2\n"
        b"2017-01,6,10,3,0.38,0.3,,,0.5,0.8\n"
    )


def test_write_diversity_csv_sorted_and_precise(tmp_path):
    rows = [
        DiversitySummary("2017-02", 1, 3, 2, 5 / 9, 2 / 3, None, None, {1: 2 / 3}),
        DiversitySummary("2017-01", 1, 1, 1, 1.0, 1.0, None, None, {1: 1.0}),
    ]
    out = tmp_path / "diversity.csv"
    write_diversity_csv(rows, str(out), top_ns=(1,))
    lines = out.read_text().splitlines()
    assert lines[1].startswith("2017-01,")
    assert lines[2] == "2017-02,1,3,2,0.5555555556,0.6666666667,,,0.6666666667"


def test_write_functions_csv(tmp_path):
    fmap = _mini_map(
        ("vimeo.com", "Video", "Vimeo", 2004),
        ("www.uber.com", "Ride sharing", "Uber", 2009),
    )
    buckets = [
        MonthlyDomainCounts("2017-02", {"vimeo.com": 1}, 1, 1),
        MonthlyDomainCounts("2017-01", {"vimeo.com": 2, "uber.com": 4}, 2, 6),
    ]
    out = tmp_path / "functions.csv"
    write_functions_csv(function_attention(buckets, fmap), str(out))
    assert out.read_bytes() == (
        b"function,month,links\n"
        b"Video,2017-01,2\n"
        b"Video,2017-02,1\n"
        b"Ride sharing,2017-01,4\n"
    )
