"""URL harvesting, domain normalization, and month bucketing.

Turning a raw post into countable link events takes three steps: pull
URL-shaped tokens out of free text, reduce each URL to the registrable
domain that identifies its operator, and bucket the post timestamp into
a UTC calendar month. All three are pure functions.

Registrable-domain reduction follows the public-suffix algorithm: the
longest matching suffix rule wins, a wildcard rule matches one extra
label, and an exception rule carves a named host out of a wildcard. The
rule snapshot ships with the package as a versioned data file; hosts
under suffixes missing from the snapshot fall back to the last two
labels, which is exactly what the default "*" rule of the algorithm
prescribes.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone
from importlib import resources

from .errors import MalformedUrl, PreEpochTimestamp

_URL_RE = re.compile(r"https?://\S+")
_SCHEME_RE = re.compile(r"^https?://", re.IGNORECASE)
_IPV4_RE = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")

# Trailing characters stripped from URL tokens: sentence punctuation always,
# closing brackets only while unbalanced against their opener inside the
# token, quotes only while the token holds an odd number of them.
_PUNCT = ".,;:!?"
_CLOSERS = {")": "(", "]": "[", "}": "{", ">": "<"}
_QUOTES = "'\""


def _load_rules() -> tuple[frozenset[str], frozenset[str], frozenset[str]]:
    text = (
        resources.files("linktally.data")
        .joinpath("public_suffix_list.dat")
        .read_text("utf-8")
    )
    exact: set[str] = set()
    wildcard_bases: set[str] = set()
    exceptions: set[str] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        if line.startswith("!"):
            exceptions.add(line[1:])
        elif line.startswith("*."):
            wildcard_bases.add(line[2:])
        else:
            exact.add(line)
    return frozenset(exact), frozenset(wildcard_bases), frozenset(exceptions)


_RULES, _WILDCARD_BASES, _EXCEPTIONS = _load_rules()


def extract_urls(text: str) -> list[str]:
    """Return every http(s) URL token in *text*, in order, duplicates kept.

    A token runs from the scheme to the first whitespace. Trailing sentence
    punctuation, closing brackets with no matching opener inside the token,
    and dangling quotes are stripped, so links survive being wrapped in
    prose like "(see https://example.com/x)."
    """
    if "http" not in text:
        return []
    out = []
    for tok in _URL_RE.findall(text):
        while tok:
            ch = tok[-1]
            if ch in _PUNCT:
                tok = tok[:-1]
            elif ch in _CLOSERS and tok.count(_CLOSERS[ch]) < tok.count(ch):
                tok = tok[:-1]
            elif ch in _QUOTES and tok.count(ch) % 2 == 1:
                tok = tok[:-1]
            else:
                break
        if tok.partition("://")[2]:
            out.append(tok)
    return out


def host_of(url: str) -> str:
    """Extract the lowercased host of an http(s) URL.

    Credentials and an explicit port are dropped; bracketed IPv6 literals
    lose their brackets; non-ASCII hostnames are punycode-encoded.
    Raises MalformedUrl when nothing host-like remains.
    """
    m = _SCHEME_RE.match(url)
    if m is None:
        raise MalformedUrl(f"not an http(s) URL: {url!r}")
    rest = url[m.end():]
    for i, ch in enumerate(rest):
        if ch in "/?#":
            rest = rest[:i]
            break
    at = rest.rfind("@")
    if at >= 0:
        rest = rest[at + 1:]
    if rest.startswith("["):
        end = rest.find("]")
        if end < 0:
            raise MalformedUrl(f"unterminated IPv6 literal in {url!r}")
        host = rest[1:end]
    elif ":" in rest:
        head, _, tail = rest.rpartition(":")
        if tail and not tail.isdigit():
            raise MalformedUrl(f"bad port in {url!r}")
        host = head
    else:
        host = rest
    host = host.strip().strip(".").lower()
    if not host or ".." in host:
        raise MalformedUrl(f"no usable host in {url!r}")
    if not host.isascii():
        try:
            host = host.encode("idna").decode("ascii")
        except UnicodeError as exc:
            raise MalformedUrl(f"cannot punycode host in {url!r}") from exc
    return host


def registrable_domain(host: str) -> str:
    """Reduce *host* to its registrable domain using the bundled suffix rules.

    Hosts under unknown suffixes fall back to the last two labels. A host
    that is itself a public suffix, or a single label, is returned as is.
    """
    labels = host.split(".")
    n = len(labels)
    if n == 1:
        return host
    ps = 1
    for k in range(2, n + 1):
        tail = ".".join(labels[n - k:])
        if tail in _EXCEPTIONS:
            ps = k - 1
            break
        if tail in _RULES:
            ps = k
        elif ".".join(labels[n - k + 1:]) in _WILDCARD_BASES:
            ps = k
    if n <= ps + 1:
        return host
    return ".".join(labels[n - ps - 1:])


def _is_ip_literal(host: str) -> bool:
    if ":" in host:
        return True
    if _IPV4_RE.match(host):
        return all(int(part) <= 255 for part in host.split("."))
    return False


def reduce_host(host: str, keep_host: bool = False) -> str:
    """Map a parsed host to its counting key.

    IP literals pass through untouched. Otherwise a single leading "www."
    label is removed and the host is reduced to its registrable domain,
    unless *keep_host* asks for the full host to be preserved. Hosts named
    by an exception rule keep their www label: the rule declares them a
    registrable unit, and stripping would make reduction non-idempotent.
    """
    if _is_ip_literal(host) or keep_host:
        return host
    if host.startswith("www.") and len(host) > 4 and host not in _EXCEPTIONS:
        host = host[4:]
    return registrable_domain(host)


def normalize_domain(url: str, keep_host: bool = False) -> str:
    """Reduce an http(s) URL to the domain it sends attention to."""
    return reduce_host(host_of(url), keep_host)


def path_of(url: str) -> str:
    """Return the path component of an http(s) URL, without query or fragment."""
    m = _SCHEME_RE.match(url)
    if m is None:
        return ""
    rest = url[m.end():]
    slash = rest.find("/")
    if slash < 0:
        return ""
    path = rest[slash:]
    for stop in "?#":
        cut = path.find(stop)
        if cut >= 0:
            path = path[:cut]
    return path


_month_cache: dict[int, str] = {}


def bucket_month(created_at: float) -> str:
    """UTC calendar month "YYYY-MM" containing the epoch instant."""
    if created_at < 0:
        raise PreEpochTimestamp(f"timestamp {created_at} precedes 1970-01-01")
    day = int(created_at) // 86400
    month = _month_cache.get(day)
    if month is None:
        dt = datetime.fromtimestamp(day * 86400, tz=timezone.utc)
        month = f"{dt.year:04d}-{dt.month:02d}"
        _month_cache[day] = month
    return month
