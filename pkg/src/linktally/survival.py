"""Birth-year cohorts and survival curves for domains.

A domain is born in the first month it receives a link and belongs to the
cohort of that month's calendar year. It survives to age a when it is
active (linked at least once) in any month of calendar year birth + a.
Age 0 is the birth year itself, so survival there is 1 by construction.
Survival need not decrease with age: a domain can lie dormant for a year
and return, and the curve reflects that.

Ages whose year has no observed months at all are omitted rather than
reported as zero; fractions for the final, possibly partial corpus year
are computed on the months that exist.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyCorpus
from .ingest import MonthlyDomainCounts


@dataclass(frozen=True)
class CohortAssignment:
    domain: str
    birth_month: str
    birth_year: int


@dataclass
class CohortTable:
    """Per birth year: cohort size and survival fraction by age.

    survival[year][a] is the fraction of the year's cohort active at age
    a; lists stop at the corpus end (right-censoring by omission).
    """

    sizes: dict[int, int]
    survival: dict[int, list[float]]


def assign_cohorts(monthly: Iterable[MonthlyDomainCounts]) -> list[CohortAssignment]:
    """One assignment per distinct domain; birth is the first month the
    domain appears, regardless of input order."""
    birth: dict[str, str] = {}
    for bucket in monthly:
        month = bucket.month
        for domain in bucket.counts:
            current = birth.get(domain)
            if current is None or month < current:
                birth[domain] = month
    if not birth:
        raise EmptyCorpus("no domains in any month")
    return [
        CohortAssignment(domain, month, int(month[:4]))
        for domain, month in sorted(birth.items())
    ]


def _month_index(month: str) -> int:
    return int(month[:4]) * 12 + int(month[5:7]) - 1


def survival_curve(
    cohorts: Iterable[CohortAssignment],
    monthly: Iterable[MonthlyDomainCounts],
    horizon_years: int,
    window: str = "calendar",
) -> CohortTable:
    """Survival fractions by age for each birth-year cohort.

    Ages run 0..horizon_years. The default "calendar" window marks a
    domain surviving at age a when it is active in calendar year
    birth_year + a. The "rolling" variant instead uses each domain's own
    12-month window starting at birth_month + 12a; an age is included
    only while every member's window starts inside the corpus.
    """
    if horizon_years < 1:
        raise ValueError("horizon_years must be at least 1")
    if window not in ("calendar", "rolling"):
        raise ValueError(f"window must be calendar or rolling, not {window!r}")
    cohorts = list(cohorts)
    monthly = list(monthly)
    if not monthly or not cohorts:
        raise EmptyCorpus("nothing to measure")
    last_month = max(b.month for b in monthly)
    last_year = int(last_month[:4])
    last_index = _month_index(last_month)

    members: dict[int, list[CohortAssignment]] = {}
    for c in cohorts:
        members.setdefault(c.birth_year, []).append(c)

    if window == "calendar":
        active_years: dict[str, set[int]] = {}
        for bucket in monthly:
            year = int(bucket.month[:4])
            for domain in bucket.counts:
                active_years.setdefault(domain, set()).add(year)
    else:
        active_months: dict[str, set[int]] = {}
        for bucket in monthly:
            index = _month_index(bucket.month)
            for domain in bucket.counts:
                active_months.setdefault(domain, set()).add(index)

    sizes: dict[int, int] = {}
    survival: dict[int, list[float]] = {}
    for birth_year in sorted(members):
        group = members[birth_year]
        size = len(group)
        sizes[birth_year] = size
        fractions: list[float] = []
        for age in range(horizon_years + 1):
            if window == "calendar":
                year = birth_year + age
                if year > last_year:
                    break
                alive = sum(
                    1 for c in group if year in active_years.get(c.domain, ())
                )
            else:
                latest_start = max(
                    _month_index(c.birth_month) + 12 * age for c in group
                )
                if latest_start > last_index:
                    break
                alive = 0
                for c in group:
                    start = _month_index(c.birth_month) + 12 * age
                    domain_months = active_months.get(c.domain, ())
                    if any(m in domain_months for m in range(start, start + 12)):
                        alive += 1
            fractions.append(alive / size)
        survival[birth_year] = fractions
    return CohortTable(sizes, survival)


def write_survival_csv(table: CohortTable, path: str) -> None:
    """One row per cohort and age: birth_year,cohort_size,age,fraction."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["birth_year", "cohort_size", "age", "fraction"])
        for birth_year in sorted(table.survival):
            size = table.sizes[birth_year]
            for age, fraction in enumerate(table.survival[birth_year]):
                writer.writerow([birth_year, size, age, "%.10g" % fraction])
