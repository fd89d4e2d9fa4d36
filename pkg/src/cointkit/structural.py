"""Chow break tests at candidate years and break-dummy construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import OutOfWindow, SubsampleTooSmall
from .series import AnnualSeries, Dataset


@dataclass(frozen=True)
class BreakResult:
    """Chow test outcome at one candidate break year."""

    year: int
    f_statistic: float
    p_value: float
    dof: tuple

    def rejects(self, level: float) -> bool:
        return self.p_value < level


def _rss(X: np.ndarray, y: np.ndarray) -> float:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ beta
    return float(e @ e)


def chow_test(ds: Dataset, dep: str, regressors, break_year: int) -> BreakResult:
    """Classical Chow test: do all coefficients shift at ``break_year``?

    The sample splits into years before the break year and years from it
    onward; the homoskedastic F statistic
    F = [(RSS_pooled - RSS_1 - RSS_2)/k] / [(RSS_1 + RSS_2)/(n - 2k)]
    uses k = number of regressors including the constant.

    Raises
    ------
    OutOfWindow
        If the break year leaves an empty side.
    SubsampleTooSmall
        If either side has fewer than k+2 observations.
    """
    if break_year <= ds.start or break_year > ds.end:
        raise OutOfWindow(f"break year {break_year} outside window interior")
    y = ds.get(dep).values
    X = np.column_stack([np.ones(ds.n_obs)] + [ds.get(nm).values for nm in regressors])
    n, k = X.shape
    split = break_year - ds.start
    n1, n2 = split, n - split
    if n1 < k + 2 or n2 < k + 2:
        raise SubsampleTooSmall(
            f"break at {break_year}: subsamples ({n1}, {n2}) need >= {k + 2} each"
        )
    rss_p = _rss(X, y)
    rss_1 = _rss(X[:split], y[:split])
    rss_2 = _rss(X[split:], y[split:])
    num = (rss_p - rss_1 - rss_2) / k
    den = (rss_1 + rss_2) / (n - 2 * k)
    F = float(num / den) if den > 0 else 0.0
    F = max(F, 0.0)
    p = float(stats.f.sf(F, k, n - 2 * k))
    return BreakResult(year=int(break_year), f_statistic=F, p_value=p, dof=(k, n - 2 * k))


def sequential_chow(ds: Dataset, dep: str, regressors, candidates) -> tuple:
    """Chow tests at every candidate year.

    Returns (results, dominant) where dominant is the year with the largest
    F among candidates significant at 5%, or None when no candidate is;
    ties go to the earliest year.
    """
    results = [chow_test(ds, dep, regressors, by) for by in candidates]
    dominant = None
    best_f = -np.inf
    for r in sorted(results, key=lambda r: r.year):
        if r.rejects(0.05) and r.f_statistic > best_f:
            dominant, best_f = r.year, r.f_statistic
    return results, dominant


def make_dummy(window: tuple, year: int, kind: str = "impulse") -> AnnualSeries:
    """Impulse (single 1) or step (1 from the year onward) dummy series."""
    start, end = int(window[0]), int(window[1])
    if not start <= year <= end:
        raise OutOfWindow(f"dummy year {year} outside window {start}-{end}")
    years = np.arange(start, end + 1)
    if kind == "impulse":
        values = (years == year).astype(float)
        name = f"d{year}"
    elif kind == "step":
        values = (years >= year).astype(float)
        name = f"s{year}"
    else:
        raise OutOfWindow(f"unknown dummy kind {kind!r}")
    return AnnualSeries(name, years, values)
