"""Exception types shared across the package.

Everything raised deliberately by library code derives from LinkTallyError,
so callers can treat validation problems uniformly and keep them separate
from genuine I/O failures, which surface as the builtin OSError.
"""

from __future__ import annotations


class LinkTallyError(Exception):
    """Base class for validation and domain errors raised by this package."""


class MalformedUrl(LinkTallyError):
    """URL has no parseable host."""


class PreEpochTimestamp(LinkTallyError):
    """Timestamp lies before 1970-01-01T00:00:00Z."""


class MonthMismatch(LinkTallyError):
    """Monthly structures do not cover matching calendar months."""


class EmptyMonth(LinkTallyError):
    """Month holds no links, so share-based metrics are undefined."""


class DegenerateSample(LinkTallyError):
    """Too few values, or zero variance, for moment statistics."""


class EmptyInput(LinkTallyError):
    """Empty value multiset."""


class DegenerateInput(LinkTallyError):
    """Fewer than two distinct values; nothing to fit."""


class DegenerateTail(LinkTallyError):
    """Tail sample cannot identify the alternative family parameters."""


class EmptyCorpus(LinkTallyError):
    """No domains observed in any month."""


class TooShort(LinkTallyError):
    """Series is shorter than the operation requires."""


class SingularRegression(LinkTallyError):
    """Design matrix is collinear or the fit is degenerate."""


class NoSignificantLag(LinkTallyError):
    """No candidate lag passes the significance screen."""


class ParseError(LinkTallyError):
    """Input file does not match its declared format."""


class DuplicateDomain(LinkTallyError):
    """Domain appears more than once in a rank snapshot."""


class EmptySnapshot(LinkTallyError):
    """Rank snapshot holds no usable entries."""
