"""Two-series econometrics: stationarity, co-integration, causality, lag choice.

The pipeline mirrors a standard two-step design. Step one establishes the
time-series properties: an augmented Dickey-Fuller (ADF) regression tests
each series for a unit root, non-stationary series are differenced, and a
residual-based two-step test checks whether the level series share a
stationary linear combination (co-integration). Step two asks whether the
attention series helps predict the value series: an F-test of lagged
attention terms at every lag from 1 to 12, plus a two-variable vector
autoregression per lag scored by the Akaike information criterion (AIC).
The chosen lag is the AIC minimizer among lags whose causality test is
significant at 5%, ties going to the smaller lag.

ADF p-values come from published response-surface approximations to the
Dickey-Fuller distribution; the coefficient tables ship as data files
with their sources noted inline. The AIC convention is
ln det(Sigma) + (2/T)(K^2 p + K) with K = 2 equations; lag selection is
invariant to the additive constants that distinguish AIC conventions.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sstats

from .errors import (
    MonthMismatch,
    NoSignificantLag,
    ParseError,
    SingularRegression,
    TooShort,
)
from .ingest import MonthlyDomainCounts

_MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")

_REGRESSIONS = ("constant", "constant+trend", "none")


@dataclass
class MonthlySeries:
    """A labelled monthly series; months strictly increasing."""

    label: str
    months: list[str]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.months)


@dataclass
class AdfResult:
    statistic: float
    p_value: float
    lags_used: int
    regression: str


@dataclass
class GrangerResult:
    lag: int
    f_statistic: float
    p_value: float
    significant: bool
    df: tuple[int, int]


@dataclass
class VarFit:
    """Equation-by-equation least-squares fit of a two-variable VAR(p)."""

    lag: int
    coefs: np.ndarray
    intercept: np.ndarray
    sigma: np.ndarray
    aic: float


def month_index(month: str) -> int:
    return int(month[:4]) * 12 + int(month[5:7]) - 1


def _check_contiguous(months: Sequence[str], what: str) -> None:
    indices = [month_index(m) for m in months]
    for a, b in zip(indices, indices[1:]):
        if b != a + 1:
            raise MonthMismatch(f"{what}: gap or disorder between months")


def load_value_series(path: str, label: str | None = None) -> MonthlySeries:
    """Read a month,value CSV into a series sorted by month."""
    rows: dict[str, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["month", "value"]:
            raise ParseError(f"{path}: expected header month,value")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 fields")
            month, value_text = row
            if not _MONTH_RE.match(month):
                raise ParseError(f"{path}:{lineno}: bad month {month!r}")
            if month in rows:
                raise ParseError(f"{path}:{lineno}: duplicate month {month!r}")
            try:
                rows[month] = float(value_text)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: bad value {value_text!r}"
                ) from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    months = sorted(rows)
    values = np.array([rows[m] for m in months], dtype=float)
    return MonthlySeries(label or "value", months, values)


def series_from_counts(
    monthly: Iterable[MonthlyDomainCounts],
    domain: str | None = None,
    label: str | None = None,
) -> MonthlySeries:
    """Monthly link totals as a series: all links, or one domain's count
    (zero in months where the domain is silent)."""
    buckets = sorted(monthly, key=lambda b: b.month)
    months = [b.month for b in buckets]
    if domain is None:
        values = [float(b.n_links) for b in buckets]
    else:
        values = [float(b.counts.get(domain, 0)) for b in buckets]
    return MonthlySeries(label or domain or "links", months, np.array(values))


def align(a: MonthlySeries, b: MonthlySeries) -> tuple[MonthlySeries, MonthlySeries]:
    """Inner-join two series on months; the joined window must be gapless."""
    common = sorted(set(a.months) & set(b.months))
    if not common:
        raise MonthMismatch(f"{a.label} and {b.label} share no months")
    _check_contiguous(common, f"{a.label}/{b.label} aligned window")
    index_a = {m: i for i, m in enumerate(a.months)}
    index_b = {m: i for i, m in enumerate(b.months)}
    va = np.array([a.values[index_a[m]] for m in common], dtype=float)
    vb = np.array([b.values[index_b[m]] for m in common], dtype=float)
    return MonthlySeries(a.label, common, va), MonthlySeries(b.label, common, vb)


def difference(series: MonthlySeries) -> MonthlySeries:
    """Consecutive deltas; one observation shorter, months shifted later."""
    if len(series) < 2:
        raise TooShort("cannot difference a series shorter than 2")
    return MonthlySeries(
        series.label, series.months[1:], np.diff(series.values)
    )


def _ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise SingularRegression(
            f"design rank {rank} below {X.shape[1]} columns"
        )
    resid = y - X @ beta
    ssr = float(resid @ resid) if resid.ndim == 1 else float(np.sum(resid * resid))
    return beta, resid, ssr


def _load_tau_table() -> dict[str, tuple[float, float, float, np.ndarray, np.ndarray]]:
    text = (
        resources.files("linktally.data")
        .joinpath("mackinnon_tau.tsv")
        .read_text("utf-8")
    )
    table: dict[str, tuple[float, float, float, np.ndarray, np.ndarray]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("case\t"):
            continue
        fields = line.split("\t")
        case = fields[0]
        nums = [float(x) for x in fields[1:]]
        table[case] = (
            nums[0],
            nums[1],
            nums[2],
            np.array(nums[3:6]),
            np.array(nums[6:10]),
        )
    return table


def _load_eg_crit() -> dict[float, np.ndarray]:
    text = (
        resources.files("linktally.data")
        .joinpath("eg_critical_values.tsv")
        .read_text("utf-8")
    )
    table: dict[float, np.ndarray] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("level\t"):
            continue
        fields = [float(x) for x in line.split("\t")]
        table[fields[0]] = np.array(fields[1:])
    return table


_TAU_TABLE = _load_tau_table()
_EG_CRIT = _load_eg_crit()


def mackinnon_p(stat: float, case: str) -> float:
    """Response-surface p-value for a Dickey-Fuller t statistic."""
    tau_star, tau_min, tau_max, small, large = _TAU_TABLE[case]
    if stat > tau_max:
        return 1.0
    if stat < tau_min:
        return 0.0
    coefs = small if stat <= tau_star else large
    z = sum(c * stat**i for i, c in enumerate(coefs))
    return float(sstats.norm.cdf(z))


def eg_critical_value(level: float, nobs: int) -> float:
    """Finite-sample critical value for the co-integration residual test."""
    b = _EG_CRIT[level]
    return float(b[0] + b[1] / nobs + b[2] / nobs**2)


def _adf_stat(
    values: np.ndarray, regression: str, max_lag: int | None
) -> tuple[float, int]:
    x = np.asarray(values, dtype=float)
    T = x.size
    if T < 20:
        raise TooShort(f"need at least 20 observations, got {T}")
    if regression not in _REGRESSIONS:
        raise ValueError(f"regression must be one of {_REGRESSIONS}")
    dx = np.diff(x)
    ntrend = {"none": 0, "constant": 1, "constant+trend": 2}[regression]
    if max_lag is None:
        max_lag = int(12.0 * (T / 100.0) ** 0.25)
    max_lag = min(max_lag, (T - 1) // 2 - ntrend - 1)
    if max_lag < 0:
        raise TooShort("series too short for any lag structure")

    def design(k: int, start: int) -> np.ndarray:
        cols = [x[start : T - 1]]
        for j in range(1, k + 1):
            cols.append(dx[start - j : T - 1 - j])
        if regression != "none":
            cols.append(np.ones(T - 1 - start))
        if regression == "constant+trend":
            cols.append(np.arange(start + 1, T, dtype=float))
        return np.column_stack(cols)

    # pick the lag by AIC on the sample every candidate can share,
    # then refit the winner on the longest sample it allows
    yc = dx[max_lag:]
    nobs_c = yc.size
    best_k, best_aic = 0, math.inf
    for k in range(0, max_lag + 1):
        X = design(k, max_lag)
        _, _, ssr = _ols(yc, X)
        if ssr <= 0.0:
            raise SingularRegression("residual variance is zero")
        aic = nobs_c * math.log(ssr / nobs_c) + 2 * X.shape[1]
        if aic < best_aic:
            best_aic, best_k = aic, k

    X = design(best_k, best_k)
    y = dx[best_k:]
    beta, _, ssr = _ols(y, X)
    dof = y.size - X.shape[1]
    if dof <= 0:
        raise TooShort("no residual degrees of freedom")
    if ssr <= 0.0:
        raise SingularRegression("residual variance is zero")
    sigma2 = ssr / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(sigma2 * xtx_inv[0, 0])
    return float(beta[0] / se), best_k


def adf_test(
    series: MonthlySeries | np.ndarray | Sequence[float],
    regression: str = "constant",
    max_lag: int | None = None,
) -> AdfResult:
    """Augmented Dickey-Fuller unit-root test.

    Regresses the first difference on the lagged level, AIC-chosen lagged
    differences (searched up to the Schwert bound 12*(T/100)^(1/4)), and
    the requested deterministic terms. The statistic is the t-ratio on
    the lagged level; small values reject the unit-root null.
    """
    values = series.values if isinstance(series, MonthlySeries) else series
    stat, lags = _adf_stat(np.asarray(values, dtype=float), regression, max_lag)
    return AdfResult(stat, mackinnon_p(stat, regression), lags, regression)


def engle_granger(
    x: np.ndarray | Sequence[float],
    y: np.ndarray | Sequence[float],
    max_lag: int | None = None,
) -> tuple[AdfResult | None, bool]:
    """Residual-based two-step co-integration test.

    Regresses y on x with an intercept, then runs an ADF regression
    without deterministic terms on the residuals. The p-value and the 5%
    decision use the two-variable residual-test distribution, which is
    wider than the plain ADF one. An identically-zero residual (y is an
    exact affine function of x) counts as co-integrated with no test
    result to report.
    """
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.size != yv.size:
        raise ValueError("series lengths differ")
    T = xv.size
    if T < 20:
        raise TooShort(f"need at least 20 observations, got {T}")
    X = np.column_stack([xv, np.ones(T)])
    _, resid, ssr = _ols(yv, X)
    scale = float(np.sum(yv * yv)) or 1.0
    if ssr / scale < 1e-24:
        return None, True
    stat, lags = _adf_stat(resid, "none", max_lag)
    result = AdfResult(stat, mackinnon_p(stat, "eg_constant"), lags, "none")
    return result, stat < eg_critical_value(0.05, T)


def granger_test(
    cause: np.ndarray | Sequence[float],
    effect: np.ndarray | Sequence[float],
    lag: int,
) -> GrangerResult:
    """F-test of whether lagged *cause* values help predict *effect*.

    Restricted model: effect on its own lags 1..lag plus intercept.
    Unrestricted adds the cause lags. F uses denominator degrees of
    freedom T - 3*lag - 1; significance is p < 0.05.
    """
    cv = np.asarray(cause, dtype=float)
    ev = np.asarray(effect, dtype=float)
    if cv.size != ev.size:
        raise ValueError("series lengths differ")
    if lag < 1:
        raise ValueError("lag must be at least 1")
    T = ev.size
    dof = T - 3 * lag - 1
    if dof < 5:
        raise TooShort(f"lag {lag} leaves {dof} degrees of freedom, need 5")
    y = ev[lag:]
    own = [ev[lag - j : T - j] for j in range(1, lag + 1)]
    other = [cv[lag - j : T - j] for j in range(1, lag + 1)]
    ones = np.ones(T - lag)
    _, _, ssr_r = _ols(y, np.column_stack([ones] + own))
    _, _, ssr_u = _ols(y, np.column_stack([ones] + own + other))
    if ssr_u <= 0.0:
        raise SingularRegression("unrestricted fit is exact")
    f_stat = max(((ssr_r - ssr_u) / lag) / (ssr_u / dof), 0.0)
    p = float(sstats.f.sf(f_stat, lag, dof))
    return GrangerResult(lag, f_stat, p, p < 0.05, (lag, dof))


def fit_var(pair: np.ndarray, lag: int) -> VarFit:
    """Two-variable VAR(p) by equation-wise least squares.

    The residual covariance uses the 1/T convention over the regression
    sample. Lag 0 degenerates to an intercept-only model whose AIC is
    ln det of the sample covariance plus 4/T.
    """
    arr = np.asarray(pair, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pair must have shape (T, 2)")
    if lag < 0:
        raise ValueError("lag must be nonnegative")
    K = 2
    T = arr.shape[0]
    if T - lag < 4 * lag + 2:
        raise TooShort(f"lag {lag} needs at least {5 * lag + 2} rows, got {T}")
    if lag == 0:
        intercept = arr.mean(axis=0)
        resid = arr - intercept
        sigma = resid.T @ resid / T
        det = float(np.linalg.det(sigma))
        if det <= 0.0:
            raise SingularRegression("residual covariance is singular")
        return VarFit(
            0, np.zeros((0, K, K)), intercept, sigma, math.log(det) + 2.0 * K / T
        )
    y = arr[lag:]
    cols = [np.ones(T - lag)]
    for j in range(1, lag + 1):
        cols.append(arr[lag - j : T - j])
    X = np.column_stack(cols)
    beta, resid, _ = _ols(y, X)
    t_eff = T - lag
    sigma = resid.T @ resid / t_eff
    det = float(np.linalg.det(sigma))
    if det <= 0.0:
        raise SingularRegression("residual covariance is singular")
    coefs = np.stack(
        [beta[1 + K * (j - 1) : 1 + K * j].T for j in range(1, lag + 1)]
    )
    aic = math.log(det) + (2.0 / t_eff) * (K * K * lag + K)
    return VarFit(lag, coefs, beta[0], sigma, aic)


def select_lag(
    aic_by_lag: Mapping[int, float], significant_lags: Iterable[int]
) -> int:
    """The significant lag with the lowest AIC; ties go to the smaller lag."""
    significant = set(significant_lags)
    eligible = [lag for lag in aic_by_lag if lag in significant]
    if not eligible:
        raise NoSignificantLag("no lag is both fitted and significant")
    return min(sorted(eligible), key=lambda lag: (aic_by_lag[lag], lag))


@dataclass
class EconPipelineReport:
    """Everything the two-step pipeline produced, plus explicit flags for
    the places where it could only partially succeed."""

    labels: tuple[str, str]
    months: list[str]
    adf_levels: dict[str, AdfResult]
    adf_diffs: dict[str, AdfResult | None]
    differenced: dict[str, bool]
    diff_stationary_ok: bool
    eg_residual: AdfResult | None
    co_integrated: bool | None
    granger: list[GrangerResult]
    var_aic: dict[int, float]
    chosen_lag: int | None
    notes: list[str] = field(default_factory=list)


def run_two_step_pipeline(
    attention: MonthlySeries,
    value: MonthlySeries,
    max_lag: int = 12,
    regression: str = "constant",
    difference_all: bool = True,
) -> EconPipelineReport:
    """Run the full two-step analysis on an attention/value series pair.

    Step one: ADF on levels, differencing (all series by default, only
    the non-stationary ones when difference_all is off), ADF on the
    differences, and the co-integration test on levels. Step two: the
    causality F-test and a VAR fit per lag on the differenced pair, then
    lag selection. Failures in any stage are recorded as notes and None
    fields instead of aborting the whole report.
    """
    a, v = align(attention, value)
    if len(a) < 24:
        raise TooShort(f"need at least 24 common months, got {len(a)}")
    notes: list[str] = []
    adf_levels = {
        a.label: adf_test(a, regression),
        v.label: adf_test(v, regression),
    }
    differenced: dict[str, bool] = {}
    for s in (a, v):
        if difference_all:
            differenced[s.label] = True
        else:
            differenced[s.label] = adf_levels[s.label].p_value >= 0.05
            if not differenced[s.label]:
                notes.append(f"{s.label}: stationary in levels, left undifferenced")

    adf_diffs: dict[str, AdfResult | None] = {}
    diff_ok = True
    for s in (a, v):
        if differenced[s.label]:
            result = adf_test(difference(s), regression)
            adf_diffs[s.label] = result
            if result.p_value >= 0.05:
                diff_ok = False
                notes.append(
                    f"{s.label}: first difference still non-stationary "
                    f"(p={result.p_value:.4f})"
                )
        else:
            adf_diffs[s.label] = None

    try:
        eg_residual, co_integrated = engle_granger(a.values, v.values)
        if eg_residual is None:
            notes.append("co-integrating residual is identically zero")
    except SingularRegression as exc:
        eg_residual, co_integrated = None, None
        notes.append(f"co-integration test degenerate: {exc}")

    # both test series enter step two on the same footing: differenced
    # where flagged, trimmed by one observation otherwise to stay aligned
    any_diff = any(differenced.values())
    work = {}
    for s in (a, v):
        if differenced[s.label]:
            work[s.label] = difference(s).values
        elif any_diff:
            work[s.label] = s.values[1:]
        else:
            work[s.label] = s.values
    wa, wv = work[a.label], work[v.label]

    granger: list[GrangerResult] = []
    for lag in range(1, max_lag + 1):
        try:
            granger.append(granger_test(wa, wv, lag))
        except TooShort:
            notes.append(f"causality test stopped at lag {lag}: sample too short")
            break
        except SingularRegression as exc:
            notes.append(f"causality test degenerate at lag {lag}: {exc}")
            break

    pair = np.column_stack([wa, wv])
    var_aic: dict[int, float] = {}
    for lag in range(0, max_lag + 1):
        try:
            var_aic[lag] = fit_var(pair, lag).aic
        except TooShort:
            notes.append(f"VAR fitting stopped at lag {lag}: sample too short")
            break
        except SingularRegression as exc:
            notes.append(f"VAR degenerate at lag {lag}: {exc}")
            break

    chosen: int | None
    try:
        chosen = select_lag(
            var_aic, [g.lag for g in granger if g.significant]
        )
    except NoSignificantLag:
        chosen = None
        notes.append("no lag passes the 5% causality screen")

    return EconPipelineReport(
        labels=(a.label, v.label),
        months=a.months,
        adf_levels=adf_levels,
        adf_diffs=adf_diffs,
        differenced=differenced,
        diff_stationary_ok=diff_ok,
        eg_residual=eg_residual,
        co_integrated=co_integrated,
        granger=granger,
        var_aic=var_aic,
        chosen_lag=chosen,
        notes=notes,
    )


def report_text(report: EconPipelineReport) -> str:
    """Human-readable rendering of a pipeline report.

    The full AIC column and the selection rule are printed so the lag
    choice can be audited against the causality table directly.
    """
    a_label, v_label = report.labels
    lines = [
        f"Two-step analysis: {a_label} (attention) vs {v_label} (value)",
        f"Window: {report.months[0]} .. {report.months[-1]}"
        f" ({len(report.months)} months)",
        "",
        "Unit-root tests (ADF)",
    ]
    for label in report.labels:
        lv = report.adf_levels[label]
        lines.append(
            f"  {label}: levels stat={lv.statistic:.4f} p={lv.p_value:.4f}"
            f" lags={lv.lags_used} regression={lv.regression}"
        )
        df = report.adf_diffs[label]
        if df is not None:
            lines.append(
                f"  {label}: first difference stat={df.statistic:.4f}"
                f" p={df.p_value:.4f} lags={df.lags_used}"
            )
    lines.append("")
    lines.append("Co-integration (residual-based two-step test)")
    if report.eg_residual is not None:
        eg = report.eg_residual
        lines.append(
            f"  residual stat={eg.statistic:.4f} p={eg.p_value:.4f}"
            f" lags={eg.lags_used}"
        )
    decided = (
        "undetermined"
        if report.co_integrated is None
        else ("yes" if report.co_integrated else "no")
    )
    lines.append(f"  co-integrated at 5%: {decided}")
    lines.append("")
    lines.append(f"Causality tests ({a_label} -> {v_label}, differenced series)")
    lines.append("  lag   F-stat    p-value  significant")
    for g in report.granger:
        lines.append(
            f"  {g.lag:>3}  {g.f_statistic:>8.4f}  {g.p_value:>9.4f}"
            f"  {'yes' if g.significant else 'no'}"
        )
    lines.append("")
    lines.append("VAR lag selection (AIC)")
    lines.append("  lag      AIC")
    for lag in sorted(report.var_aic):
        marker = "  <- chosen" if lag == report.chosen_lag else ""
        lines.append(f"  {lag:>3}  {report.var_aic[lag]:>8.4f}{marker}")
    lines.append("")
    if report.chosen_lag is None:
        lines.append("Chosen lag: none")
    else:
        lines.append(
            f"Chosen lag: {report.chosen_lag}"
            " (lowest AIC among lags significant at 5%; ties to the smaller lag)"
        )
    if report.notes:
        lines.append("Notes:")
        for note in report.notes:
            lines.append(f"  - {note}")
    lines.append("")
    return "\n".join(lines)


def write_econ_csv(report: EconPipelineReport, path: str) -> None:
    """One row per lag: lag,granger_p,significant,aic,chosen. Lags outside
    the causality range leave those fields empty."""
    granger_by_lag = {g.lag: g for g in report.granger}
    lags = sorted(set(report.var_aic) | set(granger_by_lag))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["lag", "granger_p", "significant", "aic", "chosen"])
        for lag in lags:
            g = granger_by_lag.get(lag)
            aic = report.var_aic.get(lag)
            writer.writerow(
                [
                    lag,
                    "" if g is None else "%.10g" % g.p_value,
                    "" if g is None else ("true" if g.significant else "false"),
                    "" if aic is None else "%.10g" % aic,
                    "true" if lag == report.chosen_lag else "false",
                ]
            )
