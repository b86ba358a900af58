#!/usr/bin/env python3
"""Regenerate the committed fixtures under tests/data/.

Builds a small synthetic post corpus (three dump files, one per
compression flavor), a matching month/value series, and two rank
snapshots, then replays the command-line pipeline over them and freezes
the outputs under tests/data/golden/.

Rerunning this script must be byte-stable. tests/test_acceptance.py
replays the same commands and compares against the frozen bytes, so any
change here requires regenerating the goldens in the same commit.
"""

from __future__ import annotations

import bz2
import calendar
import gzip
import importlib.resources as resources
import json
import shutil
from pathlib import Path

import numpy as np

from linktally.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "tests" / "data"

N_MONTHS = 69  # 2014-01 .. 2019-09

# (domain, low, high): monthly link volume drawn uniformly from [low, high]
STABLE = [
    ("youtube.com", 6, 14),
    ("twitter.com", 4, 9),
    ("nytimes.com", 2, 6),
    ("bbc.co.uk", 1, 5),
    ("github.com", 1, 4),
    ("reddit.com", 1, 4),
    ("wikipedia.org", 1, 3),
    ("imgur.com", 1, 3),
    ("spotify.com", 0, 2),
    ("soundcloud.com", 0, 2),
    ("netflix.com", 0, 2),
    ("vimeo.com", 0, 1),
    ("tumblr.com", 0, 1),
    ("medium.com", 0, 1),
]

# keyed by the number of links a post carries
TEMPLATES = {
    1: [
        "Check this out: {0}",
        "{0} worth a read",
        "saw this on my feed today {0} - thoughts?",
        "> quoting the article\n\nsource: {0}",
    ],
    2: [
        "relevant: {0} and also {1}",
        "{0} {1} two takes on the same story",
    ],
    3: [
        "mirror {0} original {1} context {2}",
    ],
}

LINKLESS = [
    "no sources today, just speculation",
    "agreed, that matches what I heard",
    "can someone find a source for this?",
]


def year_month(i: int) -> tuple[int, int]:
    return 2014 + i // 12, 1 + i % 12


def month_key(i: int) -> str:
    year, month = year_month(i)
    return f"{year}-{month:02d}"


def stamp(rng: np.random.Generator, i: int) -> int:
    year, month = year_month(i)
    day = int(rng.integers(2, 27))
    return calendar.timegm((year, month, day, int(rng.integers(0, 24)), 0, 0))


def token(rng: np.random.Generator) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
    return "".join(alphabet[int(c)] for c in rng.integers(0, 36, size=6))


def make_url(rng: np.random.Generator, domain: str) -> str:
    scheme = "https" if rng.random() < 0.6 else "http"
    www = "www." if rng.random() < 0.3 else ""
    return f"{scheme}://{www}{domain}/{token(rng)}"


def tesla_series(rng: np.random.Generator) -> list[int]:
    """Bounded integer walk; every month links tesla.com at least once."""
    level = 4
    out = []
    for _ in range(N_MONTHS):
        level = int(np.clip(level + rng.integers(-2, 3), 1, 12))
        out.append(level)
    return out


def month_urls(rng: np.random.Generator, i: int, tesla: int) -> list[str]:
    urls = [make_url(rng, "tesla.com") for _ in range(tesla)]
    for domain, low, high in STABLE:
        for _ in range(int(rng.integers(low, high + 1))):
            urls.append(make_url(rng, domain))
    # singleton long-tail domains keep the count-1 mass realistic
    for _ in range(int(rng.integers(1, 4))):
        urls.append(make_url(rng, f"{token(rng)}.io"))
    if i >= 14 and rng.random() < 0.35:
        urls.append(f"https://plus.google.com/{token(rng)}")
    if i >= 14 and rng.random() < 0.3:
        urls.append(f"https://drive.google.com/file/d/{token(rng)}")
    if i >= 20 and rng.random() < 0.3:
        urls.append(f"https://www.amazon.com/video/detail/{token(rng)}")
    if rng.random() < 0.25:
        urls.append(f"https://www.amazon.com/dp/{token(rng)}")
    if rng.random() < 0.2:
        urls.append(f"https://www.google.com/search?q={token(rng)}")
    if i in (50, 61):
        urls.append(f"http://dhaka.gov.bd/{token(rng)}")
    rng.shuffle(urls)
    return urls


def post_line(created, body: str) -> str:
    return json.dumps({"created_utc": created, "body": body}) + "\n"


def month_posts(rng: np.random.Generator, i: int, tesla: int) -> list[str]:
    urls = month_urls(rng, i, tesla)
    lines = []
    while urls:
        take = min(int(rng.integers(1, 4)), len(urls))
        options = TEMPLATES[take]
        body = options[int(rng.integers(0, len(options)))].format(*urls[:take])
        urls = urls[take:]
        created: object = stamp(rng, i)
        roll = rng.random()
        if roll < 0.05:
            created = float(created)
        elif roll < 0.08:
            created = str(created)
        lines.append(post_line(created, body))
    for _ in range(int(rng.integers(0, 2))):
        lines.append(post_line(stamp(rng, i), LINKLESS[int(rng.integers(0, 3))]))
    # fixed oddities at known months
    if i == 30:
        lines.append(post_line(stamp(rng, i), "dead link http://brokenhost.com:xx/path"))
    if i == 40:
        lines.append(post_line(stamp(rng, i), "twice http://imgur.com/dupdup http://imgur.com/dupdup"))
    return lines


def build_corpus(rng: np.random.Generator, tesla: list[int]) -> None:
    corpus = DATA / "corpus"
    shutil.rmtree(corpus, ignore_errors=True)
    corpus.mkdir(parents=True)
    chunks: dict[str, list[str]] = {"a": [], "b": [], "c": []}
    for i in range(N_MONTHS):
        part = "a" if i < 24 else ("b" if i < 48 else "c")
        chunks[part].extend(month_posts(rng, i, tesla[i]))
    chunks["a"].insert(31, "{this line is not json\n")
    chunks["a"].insert(150, post_line(1398000000, "missing the text field") .replace('"body"', '"other"'))
    chunks["b"].insert(77, post_line(-12, "pre-epoch http://old.net/x"))
    chunks["c"].insert(40, post_line("not-a-time", "bad stamp http://old.net/y"))

    (corpus / "posts-2014-2015.ndjson").write_text("".join(chunks["a"]))
    # mtime pinned so regeneration is byte-stable
    with gzip.GzipFile(corpus / "posts-2016-2017.ndjson.gz", "wb", mtime=0) as f:
        f.write("".join(chunks["b"]).encode("utf-8"))
    with bz2.open(corpus / "posts-2018-2019.ndjson.bz2", "wb") as f:
        f.write("".join(chunks["c"]).encode("utf-8"))


def build_values(rng: np.random.Generator, tesla: list[int]) -> None:
    """Monthly value series whose first difference tracks the tesla.com
    link count difference two months earlier."""
    dtesla = np.diff(tesla)
    level = 80.0
    rows = ["month,value"]
    for t in range(N_MONTHS):
        shock = 1.4 * dtesla[t - 3] if t >= 3 else 0.0
        level += 1.5 + shock + 0.9 * rng.normal()
        rows.append(f"{month_key(t)},{level:.4f}")
    (DATA / "ev.csv").write_text("\n".join(rows) + "\n")


RANK_DOMAINS = [
    "google.com", "youtube.com", "facebook.com", "twitter.com", "wikipedia.org",
    "amazon.com", "reddit.com", "instagram.com", "linkedin.com", "netflix.com",
    "yahoo.com", "ebay.com", "bing.com", "imgur.com", "github.com",
    "nytimes.com", "cnn.com", "bbc.co.uk", "espn.com", "imdb.com",
    "pinterest.com", "tumblr.com", "paypal.com", "wordpress.com", "blogspot.com",
    "craigslist.org", "stackoverflow.com", "apple.com", "microsoft.com", "office.com",
    "spotify.com", "soundcloud.com", "twitch.tv", "vimeo.com", "dropbox.com",
    "adobe.com", "quora.com", "etsy.com", "walmart.com", "target.com",
    "zillow.com", "yelp.com", "weather.com", "accuweather.com", "foxnews.com",
    "washingtonpost.com", "theguardian.com", "forbes.com", "bloomberg.com", "reuters.com",
]


def build_ranks() -> None:
    ranks = DATA / "ranks"
    shutil.rmtree(ranks, ignore_errors=True)
    ranks.mkdir(parents=True)
    raw = [1.0 / (k + 1) ** 1.1 for k in range(len(RANK_DOMAINS))]
    total = sum(raw)
    lines = ["domain,pagerank"]
    for domain, w in zip(RANK_DOMAINS, raw):
        lines.append(f"{domain},{w / total:.8f}")
    (ranks / "2019.csv").write_text("\n".join(lines) + "\n")

    lines = ["domain,pagerank"]
    for k, domain in enumerate(RANK_DOMAINS[:40]):
        lines.append(f"{domain},{round(5000.0 / (k + 1) ** 1.3, 2)}")
    (ranks / "2020.csv").write_text("\n".join(lines) + "\n")


def run_pipeline(out_dir: Path) -> None:
    """Replay the full pipeline into out_dir. Keep the commands in sync
    with the end-to-end check in tests/test_acceptance.py."""
    out = str(out_dir)
    corpus = sorted(str(p) for p in (DATA / "corpus").iterdir())
    bundled = resources.files("linktally").joinpath("data/functions.tsv")
    with resources.as_file(bundled) as map_path:
        rc = cli_main(["ingest", *corpus, "--retain-paths-for", str(map_path),
                       "--out-dir", out])
    assert rc == 0
    counts = str(out_dir / "domain-counts.csv")
    for argv in (
        ["metrics", counts, "--out-dir", out],
        ["tailfit", counts, "--out-dir", out],
        ["survival", counts, "--out-dir", out],
        ["functions", counts, "--out-dir", out],
        ["econ", counts, str(DATA / "ev.csv"), "--domain", "tesla.com",
         "--out-dir", out],
        ["rankshare", str(DATA / "ranks" / "2019.csv"),
         str(DATA / "ranks" / "2020.csv"), "--top-ns", "1,10,100",
         "--out-dir", out],
    ):
        assert cli_main(argv) == 0, argv


def main() -> None:
    rng = np.random.default_rng(20140101)
    tesla = tesla_series(rng)
    build_corpus(rng, tesla)
    build_values(np.random.default_rng(20190901), tesla)
    build_ranks()
    golden = DATA / "golden"
    shutil.rmtree(golden, ignore_errors=True)
    golden.mkdir(parents=True)
    run_pipeline(golden)
    for name in sorted(p.name for p in golden.iterdir()):
        print("golden:", name)


if __name__ == "__main__":
    main()
