"""Release checklist: exactness, statistical power, determinism, and
end-to-end reproducibility.

Each test prints one PASS/FAIL line before asserting, so running this
module with -s doubles as a readable report.
"""

from __future__ import annotations

import calendar
import importlib.resources as resources
import json
import math
import time
from pathlib import Path

import numpy as np

from linktally import diversity, econ, ingest, survival, tailfit
from linktally.cli import main as cli_main
from linktally.econ import MonthlySeries
from linktally.ingest import IngestStats, MonthlyDomainCounts

DATA = Path(__file__).parent / "data"


def _line(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _months(n: int, start_year: int = 2000) -> list[str]:
    return [f"{start_year + i // 12}-{1 + i % 12:02d}" for i in range(n)]


# --- 1: lag selection on two hand-checked tables ------------------------

# AIC by lag plus the set of lags whose causality test is significant.
# In both tables the starred entry is the minimum AIC among the
# significant lags; selection must land on it exactly.
TABLE_A_AIC = {
    0: 13.15, 1: 13.21, 2: 13.25, 3: 13.36, 4: 13.31, 5: 13.31, 6: 13.29,
    7: 13.48, 8: 13.69, 9: 13.83, 10: 13.75, 11: 13.74, 12: 13.01,
}
TABLE_A_SIG = range(2, 13)  # chosen: 12
TABLE_B_AIC = {
    0: 12.97, 1: 12.90, 2: 12.97, 3: 12.84, 4: 12.70, 5: 12.91, 6: 12.92,
    7: 12.94, 8: 13.14, 9: 13.40, 10: 13.49, 11: 13.41, 12: 13.40,
}
TABLE_B_SIG = range(4, 13)  # chosen: 4


def test_lag_selection_fixed_points():
    t0 = time.perf_counter()
    a = econ.select_lag(TABLE_A_AIC, TABLE_A_SIG)
    b = econ.select_lag(TABLE_B_AIC, TABLE_B_SIG)
    dt = time.perf_counter() - t0
    ok = a == 12 and b == 4 and dt < 1.0
    _line("01 lag-selection fixed points", ok, f"chose {a} and {b} in {dt:.3f}s")
    assert (a, b) == (12, 4)
    assert dt < 1.0


# --- 2: concentration identities on random count maps -------------------


def test_concentration_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    trials = 1000
    for trial in range(trials):
        n = int(rng.integers(1, 60))
        if trial % 5 == 4:
            counts = {f"d{i}.com": 7 for i in range(n)}
        elif trial % 5 == 3:
            counts = {"solo.com": int(rng.integers(1, 10_000))}
        else:
            counts = {f"d{i}.com": int(rng.integers(1, 10_000)) for i in range(n)}
        c = diversity.hhi(counts)
        size = len(counts)
        assert 1.0 / size - 1e-9 <= c <= 1.0 + 1e-12
        even = len(set(counts.values())) == 1
        assert even == math.isclose(c, 1.0 / size, rel_tol=1e-12)
        if size == 1:
            assert c == 1.0
        total = sum(counts.values())
        orig = diversity.link_originality(counts)
        assert round(orig * total) == size
        assert math.isclose(orig * total, size, rel_tol=1e-9)
    dt = time.perf_counter() - t0
    ok = dt < 5.0
    _line("02 concentration identities", ok, f"{trials} maps in {dt:.2f}s")
    assert dt < 5.0


# --- 3: heavy-tail parameter recovery -----------------------------------


def _tail_sampler(alpha: float = 2.5, xmin: int = 5, xmax: int = 10**6):
    support = np.arange(xmin, xmax + 1)
    weights = support.astype(float) ** -alpha
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return support[np.searchsorted(cdf, rng.random(n), side="left")]

    return draw


def test_power_law_recovery():
    t0 = time.perf_counter()
    draw = _tail_sampler()
    fit = tailfit.fit_power_law(draw(np.random.default_rng(42), 20_000), exact=True)
    point_ok = 2.4 <= fit.alpha <= 2.6 and 3 <= fit.xmin <= 8
    covered = 0
    for seed in range(100):
        f = tailfit.fit_power_law(draw(np.random.default_rng(1000 + seed), 20_000),
                                  exact=True)
        se = (f.alpha - 1.0) / math.sqrt(f.n_tail)
        covered += abs(f.alpha - 2.5) <= 3.0 * se
    dt = time.perf_counter() - t0
    ok = point_ok and covered >= 95 and dt < 60.0
    _line("03 heavy-tail recovery", ok,
          f"alpha={fit.alpha:.4f} xmin={fit.xmin} coverage={covered}/100 in {dt:.1f}s")
    assert 2.4 <= fit.alpha <= 2.6
    assert 3 <= fit.xmin <= 8
    assert covered >= 95
    assert dt < 60.0


# --- 4: likelihood-ratio sign against the thin-tailed family ------------


def test_llr_sign_against_exponential():
    t0 = time.perf_counter()
    draw = _tail_sampler()
    hits = 0
    for seed in range(100):
        xs = draw(np.random.default_rng(5000 + seed), 2500)
        fit = tailfit.fit_power_law(xs)
        cmp = tailfit.loglik_ratio(xs, fit.xmin, "power_law", "exponential")
        hits += cmp.R > 0 and cmp.p_value < 0.1
    dt = time.perf_counter() - t0
    ok = hits >= 90 and dt < 60.0
    _line("04 likelihood-ratio sign", ok, f"{hits}/100 favored the heavy tail in {dt:.1f}s")
    assert hits >= 90
    assert dt < 60.0


# --- 5: unit-root test size and power -----------------------------------


def test_unit_root_size_and_power():
    t0 = time.perf_counter()
    T = 200
    rw_rej = 0
    ar_rej = 0
    for seed in range(500):
        rng = np.random.default_rng(10_000 + seed)
        rw = np.cumsum(rng.normal(size=T))
        rw_rej += econ.adf_test(rw).p_value < 0.05
        shocks = rng.normal(size=T)
        ar = np.empty(T)
        ar[0] = shocks[0]
        for t in range(1, T):
            ar[t] = 0.5 * ar[t - 1] + shocks[t]
        ar_rej += econ.adf_test(ar).p_value < 0.05
    size = rw_rej / 500
    power = ar_rej / 500
    dt = time.perf_counter() - t0
    ok = 0.02 <= size <= 0.08 and power >= 0.90 and dt < 120.0
    _line("05 unit-root size and power", ok,
          f"size {size:.1%}, power {power:.1%} in {dt:.1f}s")
    assert 0.02 <= size <= 0.08
    assert power >= 0.90
    assert dt < 120.0


# --- 6: co-integration detection and false positives --------------------


def test_cointegration_detection():
    t0 = time.perf_counter()
    T = 200
    detected = 0
    false_flags = 0
    for seed in range(200):
        rng = np.random.default_rng(20_000 + seed)
        x = np.cumsum(rng.normal(size=T))
        y = 1.5 * x + rng.normal(size=T)
        detected += econ.engle_granger(x, y)[1]
        a = np.cumsum(rng.normal(size=T))
        b = np.cumsum(rng.normal(size=T))
        false_flags += econ.engle_granger(a, b)[1]
    dt = time.perf_counter() - t0
    ok = detected >= 180 and false_flags <= 20 and dt < 120.0
    _line("06 co-integration detection", ok,
          f"detected {detected}/200, false {false_flags}/200 in {dt:.1f}s")
    assert detected >= 180
    assert false_flags <= 20
    assert dt < 120.0


# --- 7: causality power, size, and whole-pipeline lag choice ------------


def _lag3_pair(seed: int, T: int = 200) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=T)
    noise = rng.normal(size=T)
    y = np.zeros(T)
    for t in range(T):
        y[t] = (0.8 * x[t - 3] if t >= 3 else 0.0) + noise[t]
    return x, y


def test_causality_power_size_and_lag_choice():
    t0 = time.perf_counter()
    months = _months(200)

    power_hits = 0
    for seed in range(200):
        x, y = _lag3_pair(seed)
        power_hits += all(
            econ.granger_test(x, y, lag).p_value < 0.05 for lag in range(3, 13)
        )

    size_hits = 0
    for seed in range(500):
        rng = np.random.default_rng(30_000 + seed)
        a = rng.normal(size=200)
        b = rng.normal(size=200)
        size_hits += econ.granger_test(a, b, 3).p_value < 0.05
    size = size_hits / 500

    chosen_hits = 0
    for seed in range(200):
        x, y = _lag3_pair(40_000 + seed)
        att = MonthlySeries("att", months, np.cumsum(x))
        val = MonthlySeries("val", months, np.cumsum(y))
        chosen_hits += econ.run_two_step_pipeline(att, val).chosen_lag == 3

    dt = time.perf_counter() - t0
    ok = (power_hits >= 190 and abs(size - 0.05) <= 0.03
          and chosen_hits >= 180 and dt < 120.0)
    _line("07 causality power, size, lag choice", ok,
          f"causal lags {power_hits}/200, size {size:.1%}, "
          f"chosen-lag-3 {chosen_hits}/200 in {dt:.1f}s")
    assert power_hits >= 190
    assert abs(size - 0.05) <= 0.03
    assert chosen_hits >= 180, (
        f"lag 3 chosen in {chosen_hits}/200 runs; the minimum-AIC search "
        "over the higher significant lags accepts a spurious deeper lag in "
        "roughly 12% of runs even asymptotically, which caps the achievable "
        "rate below the 90% target at every sample size"
    )
    assert dt < 120.0


# --- 8: cohort survival fixtures ----------------------------------------


def _bucket(month: str, *domains: str) -> MonthlyDomainCounts:
    counts = {d: 1 for d in domains}
    return MonthlyDomainCounts(month, counts, n_posts=len(domains),
                               n_links=len(domains))


def test_survival_fixtures():
    buckets = [_bucket("2006-02", "d1.com", "d2.com")]
    buckets += [_bucket(f"{year}-06", "d1.com") for year in range(2007, 2012)]
    table = survival.survival_curve(survival.assign_cohorts(buckets), buckets,
                                    5, "calendar")
    hand_ok = table.survival == {2006: [1.0, 0.5, 0.5, 0.5, 0.5, 0.5]}

    heads_ok = True
    pool = [f"d{k}.net" for k in range(30)]
    for seed in range(100):
        rng = np.random.default_rng(seed)
        corpus = []
        for i in range(60):
            picks = [d for d in pool if rng.random() < 0.3]
            if not picks:
                picks = [pool[int(rng.integers(0, 30))]]
            corpus.append(_bucket(_months(60, 2005)[i], *picks))
        t = survival.survival_curve(survival.assign_cohorts(corpus), corpus,
                                    3, "calendar")
        heads_ok &= all(curve[0] == 1.0 for curve in t.survival.values())

    dip = [_bucket("2006-03", "gone.com"), _bucket("2007-05", "filler.com"),
           _bucket("2008-09", "gone.com")]
    t = survival.survival_curve(survival.assign_cohorts(dip), dip, 2, "calendar")
    dip_ok = t.survival[2006] == [1.0, 0.0, 1.0]

    ok = hand_ok and heads_ok and dip_ok
    _line("08 cohort survival fixtures", ok,
          f"hand={hand_ok} heads={heads_ok} dip={dip_ok}")
    assert hand_ok
    assert heads_ok
    assert dip_ok


# --- 9: ingestion determinism and throughput ----------------------------


def test_ingestion_determinism_and_throughput(tmp_path):
    rng = np.random.default_rng(99)
    domains = [f"host{k:02d}.com" for k in range(40)]
    paths = []
    for part in range(8):
        lines = []
        for _ in range(12_500):
            mo = int(rng.integers(0, 24))
            ts = calendar.timegm((2013 + mo // 12, 1 + mo % 12, 5, 0, 0, 0))
            ts += int(rng.integers(0, 2_000_000))
            d = domains[int(rng.integers(0, len(domains)))]
            body = f"see https://{d}/p{int(rng.integers(0, 9999))} today"
            lines.append(json.dumps({"created_utc": ts, "body": body}) + "\n")
        p = tmp_path / f"part{part}.ndjson"
        p.write_text("".join(lines))
        paths.append(str(p))

    t0 = time.perf_counter()
    fused, stats = ingest.ingest_files(paths, workers=1)
    dt = time.perf_counter() - t0
    throughput = stats.posts_read / dt

    parallel, pstats = ingest.ingest_files(paths, workers=8)
    ingest.write_domain_counts(fused, str(tmp_path / "one.csv"))
    ingest.write_domain_counts(parallel, str(tmp_path / "eight.csv"))
    bytes_equal = ((tmp_path / "one.csv").read_bytes()
                   == (tmp_path / "eight.csv").read_bytes())

    partials = [ingest.ingest_path(p) for p in paths]
    stat_sum = IngestStats()
    merged: dict[str, MonthlyDomainCounts] = {}
    for buckets, s in partials:
        stat_sum.add(s)
        for b in buckets:
            merged[b.month] = (b if b.month not in merged
                               else ingest.merge_counts(merged[b.month], b))
    split_ok = ([merged[m] for m in sorted(merged)] == fused
                and stat_sum == stats == pstats)

    ok = bytes_equal and split_ok and throughput >= 50_000
    _line("09 ingestion determinism and throughput", ok,
          f"{stats.posts_read} posts, {throughput:,.0f} posts/s/worker, "
          f"workers byte-equal={bytes_equal}, split-invariant={split_ok}")
    assert bytes_equal
    assert split_ok
    assert throughput >= 50_000


# --- 10: end-to-end outputs match the committed files -------------------


def test_end_to_end_matches_committed_outputs(tmp_path):
    golden = DATA / "golden"
    out = tmp_path / "out"
    out.mkdir()
    corpus = sorted(str(p) for p in (DATA / "corpus").iterdir())
    bundled = resources.files("linktally").joinpath("data/functions.tsv")
    with resources.as_file(bundled) as map_path:
        rc = cli_main(["ingest", *corpus, "--retain-paths-for", str(map_path),
                       "--out-dir", str(out)])
    assert rc == 0
    counts = str(out / "domain-counts.csv")
    for argv in (
        ["metrics", counts, "--out-dir", str(out)],
        ["tailfit", counts, "--out-dir", str(out)],
        ["survival", counts, "--out-dir", str(out)],
        ["functions", counts, "--out-dir", str(out)],
        ["econ", counts, str(DATA / "ev.csv"), "--domain", "tesla.com",
         "--out-dir", str(out)],
        ["rankshare", str(DATA / "ranks" / "2019.csv"),
         str(DATA / "ranks" / "2020.csv"), "--top-ns", "1,10,100",
         "--out-dir", str(out)],
    ):
        assert cli_main(argv) == 0, argv

    produced = {p.name for p in out.iterdir()}
    expected = {p.name for p in golden.iterdir()}
    mismatched = sorted(
        name for name in expected & produced
        if (out / name).read_bytes() != (golden / name).read_bytes()
    )
    ok = produced == expected and not mismatched
    _line("10 end-to-end reproducibility", ok,
          f"{len(expected)} files, mismatched={mismatched or 'none'}")
    assert produced == expected
    assert mismatched == []
