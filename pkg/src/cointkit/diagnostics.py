"""Residual diagnostic battery, recursive-stability paths, Granger causality.

Every scalar test returns a :class:`~cointkit.results.TestResult`; the two
stability tests return :class:`StabilityPath` objects carrying the full
trajectory, its significance bands and a crossing flag, ready to be written
as plot data.

Recursive residuals follow Brown-Durbin-Evans: the model is refit on each
growing head subsample and the one-step-ahead prediction error is scaled by
its variance factor. The recursion starts at the first subsample whose
design has full column rank, which may be later than k+1 when a regressor
is a break dummy that is all zero early in the sample; the band arithmetic
uses the number of residuals actually computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import tables
from .errors import TooShort, UnsupportedCase, ZeroVariance
from .regress import RegressionResult, ols_fit
from .results import TestResult
from .series import Dataset


@dataclass(frozen=True)
class StabilityPath:
    """A recursive-stability trajectory with its significance bands.

    Attributes
    ----------
    test_name : str
        "cusum" or "cusumsq".
    years : ndarray
        One label per path point; the first point is the anchor before the
        first recursive residual.
    path : ndarray
        The trajectory, same length as ``years``.
    lower, upper : ndarray
        Significance bands at the same points.
    crosses : bool
        True iff the path leaves the band anywhere.
    m : int
        Number of recursive residuals behind the path.
    level : float
        Band significance level.
    """

    test_name: str
    years: np.ndarray
    path: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    crosses: bool
    m: int
    level: float

    def rows(self) -> list:
        return [
            {"year": int(y), "statistic": float(s), "lower": float(lo), "upper": float(hi)}
            for y, s, lo, hi in zip(self.years, self.path, self.lower, self.upper)
        ]


@dataclass(frozen=True)
class DiagnosticReport:
    """The full battery: scalar tests plus both stability paths."""

    tests: tuple
    cusum: StabilityPath
    cusumsq: StabilityPath

    def by_name(self, name: str) -> TestResult:
        for t in self.tests:
            if t.name == name:
                return t
        raise KeyError(name)

    def failures(self, level: float = 0.05) -> list:
        out = [t.name for t in self.tests if t.rejects(level)]
        if self.cusum.crosses:
            out.append("cusum")
        if self.cusumsq.crosses:
            out.append("cusumsq")
        return out


def _centered_tss(v: np.ndarray) -> float:
    return float(np.sum((v - v.mean()) ** 2))


def _degenerate_residuals(r: RegressionResult) -> bool:
    """Residuals that are pure roundoff make any LM ratio meaningless."""
    scale = max(1.0, float(np.max(np.abs(r.y))))
    return float(np.sqrt(np.mean(r.residuals**2))) < 1e-12 * scale


def _lm_from_aux(
    dep: np.ndarray, design: dict, df: int, name: str, degenerate: bool = False
) -> TestResult:
    """n*R^2 LM statistic from an auxiliary regression, chi2(df) p-value."""
    n = len(dep)
    tss = _centered_tss(dep)
    if degenerate or tss <= 0.0:
        stat = 0.0
    else:
        aux = ols_fit(dep, design, intercept=False)
        stat = max(n * (1.0 - aux.rss / tss), 0.0)
    return TestResult(
        name=name,
        statistic=float(stat),
        p_value=float(stats.chi2.sf(stat, df)),
        distribution=f"chi2({df})",
        params={"df": df, "nobs": n},
    )


def breusch_godfrey(r: RegressionResult, lags: int = 2) -> TestResult:
    """Serial-correlation LM test: residuals on X plus lagged residuals.

    Pre-sample lagged residuals are zero-padded so the auxiliary regression
    keeps all n rows; the statistic is n*R^2 against chi2(lags).
    """
    if lags < 1:
        raise UnsupportedCase(f"lags={lags} must be >= 1")
    e = r.residuals
    n = len(e)
    if n <= r.k + lags + 2:
        raise TooShort(f"n={n} too small for k={r.k} plus {lags} residual lags")
    design = {nm: r.X[:, j] for j, nm in enumerate(r.names)}
    for j in range(1, lags + 1):
        col = np.zeros(n)
        col[j:] = e[:-j]
        design[f"resid_l{j}"] = col
    return _lm_from_aux(e, design, lags, "breusch-godfrey", _degenerate_residuals(r))


def arch_lm(r: RegressionResult, lags: int = 1) -> TestResult:
    """ARCH LM test: squared residuals on their own lags, chi2(lags)."""
    if lags < 1:
        raise UnsupportedCase(f"lags={lags} must be >= 1")
    e2 = r.residuals**2
    n = len(e2) - lags
    if n <= lags + 2:
        raise TooShort(f"only {n} usable rows for {lags} squared-residual lags")
    design = {"const": np.ones(n)}
    for j in range(1, lags + 1):
        design[f"resid2_l{j}"] = e2[lags - j : lags - j + n]
    return _lm_from_aux(e2[lags:], design, lags, "arch-lm", _degenerate_residuals(r))


def breusch_pagan(r: RegressionResult) -> TestResult:
    """Heteroskedasticity LM test: squared residuals on the original X.

    Degrees of freedom count the non-constant regressors.
    """
    df = r.k - (1 if r.intercept else 0)
    if df < 1:
        raise UnsupportedCase("breusch-pagan needs at least one non-constant regressor")
    design = {nm: r.X[:, j] for j, nm in enumerate(r.names)}
    return _lm_from_aux(r.residuals**2, design, df, "breusch-pagan", _degenerate_residuals(r))


def jarque_bera(residuals) -> TestResult:
    """Normality test from sample skewness and kurtosis, chi2(2)."""
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if n < 8:
        raise TooShort(f"jarque-bera needs >= 8 observations, have {n}")
    c = e - e.mean()
    m2 = float(np.mean(c**2))
    if m2 <= 0.0:
        stat = 0.0
        skew, kurt = 0.0, 3.0
    else:
        skew = float(np.mean(c**3) / m2**1.5)
        kurt = float(np.mean(c**4) / m2**2)
        stat = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return TestResult(
        name="jarque-bera",
        statistic=float(stat),
        p_value=float(stats.chi2.sf(stat, 2)),
        distribution="chi2(2)",
        params={"skewness": skew, "kurtosis": kurt, "nobs": n},
    )


def ramsey_reset(r: RegressionResult, powers=(2, 3)) -> TestResult:
    """Functional-form F test on added powers of the fitted values.

    The fitted values are standardized before powering (a pure conditioning
    step: jointly with the original columns the added terms span the same
    space as raw powers, so the F statistic is unchanged).
    """
    powers = tuple(powers)
    if not powers or any(p not in (2, 3) for p in powers):
        raise UnsupportedCase(f"powers {powers} must be a nonempty subset of (2, 3)")
    f = r.fitted
    sd = float(f.std(ddof=1)) if len(f) > 1 else 0.0
    if sd <= 1e-12 * max(1.0, float(np.max(np.abs(f)))):
        raise ZeroVariance("fitted values are constant; reset is undefined")
    z = (f - f.mean()) / sd
    design = {nm: r.X[:, j] for j, nm in enumerate(r.names)}
    for p in powers:
        design[f"fitted_pow{p}"] = z**p
    q = len(powers)
    n, k1 = r.n, r.k + q
    if n <= k1 + 1:
        raise TooShort(f"n={n} too small for {k1} parameters")
    aux = ols_fit(r.y, design, intercept=False)
    num = (r.rss - aux.rss) / q
    den = aux.rss / (n - k1)
    stat = max(num / den, 0.0) if den > 0 else 0.0
    return TestResult(
        name="ramsey-reset",
        statistic=float(stat),
        p_value=float(stats.f.sf(stat, q, n - k1)),
        distribution=f"F({q}, {n - k1})",
        params={"powers": powers},
    )


def recursive_residuals(r: RegressionResult) -> tuple:
    """One-step-ahead standardized prediction errors over growing subsamples.

    Returns (w, t_first) where w[j] is the residual at observation index
    t_first + j (0-based) and t_first is the first index whose head
    subsample has full column rank.
    """
    X, y = r.X, r.y
    n, k = X.shape
    if n <= k + 1:
        raise TooShort(f"recursive residuals need n > k+1, have n={n}, k={k}")

    def full_rank(head):
        diag = np.abs(np.diag(np.linalg.qr(X[:head], mode="r")))
        return diag.size and diag.min() > max(head, k) * np.finfo(float).eps * diag.max()

    t_first = None
    for head in range(k, n):
        if full_rank(head):
            t_first = head
            break
    if t_first is None or t_first >= n:
        raise TooShort("design never reaches full column rank with a row to spare")

    w = []
    for t in range(t_first, n):
        Q, R = np.linalg.qr(X[:t])
        beta = np.linalg.solve(R, Q.T @ y[:t])
        xt = X[t]
        z = np.linalg.solve(R, np.linalg.solve(R.T, xt))
        factor = 1.0 + float(xt @ z)
        w.append((y[t] - float(xt @ beta)) / np.sqrt(factor))
    return np.asarray(w), t_first


def cusum(r: RegressionResult, level: float = 0.05) -> StabilityPath:
    """Cumulative sum of scaled recursive residuals with straight-line bands.

    The path starts at 0; the bands run from +/- a*sqrt(m) at the anchor to
    +/- 3a*sqrt(m) at the end (a = 0.948 at the 5% level).
    """
    w, t_first = recursive_residuals(r)
    m = len(w)
    if m < 2:
        raise TooShort(f"need >= 2 recursive residuals, have {m}")
    sigma = float(np.sqrt(np.sum((w - w.mean()) ** 2) / (m - 1)))
    if sigma <= 0.0:
        raise ZeroVariance("recursive residuals are constant")
    path = np.concatenate([[0.0], np.cumsum(w) / sigma])
    j = np.arange(m + 1, dtype=float)
    a = tables.cusum_band_scale(level)
    upper = a * (np.sqrt(m) + 2.0 * j / np.sqrt(m))
    years = r.years[t_first - 1 : t_first + m]
    crosses = bool(np.any(np.abs(path) > upper))
    return StabilityPath("cusum", years, path, -upper, upper, crosses, m, level)


def cusumsq(r: RegressionResult, level: float = 0.05) -> StabilityPath:
    """Cumulative squared-share path of recursive residuals with c0 bands."""
    w, t_first = recursive_residuals(r)
    m = len(w)
    total = float(np.sum(w**2))
    if total <= 0.0:
        raise ZeroVariance("recursive residuals are all zero")
    path = np.concatenate([[0.0], np.cumsum(w**2) / total])
    j = np.arange(m + 1, dtype=float)
    center = j / m
    c0 = tables.cusumsq_band_halfwidth(m, level)
    years = r.years[t_first - 1 : t_first + m]
    crosses = bool(np.any(np.abs(path - center) > c0))
    return StabilityPath("cusumsq", years, path, center - c0, center + c0, crosses, m, level)


def diagnostic_report(
    r: RegressionResult,
    bg_lags: int = 2,
    arch_lags: int = 1,
    reset_powers=(2, 3),
    level: float = 0.05,
) -> DiagnosticReport:
    """Run the full battery on one fitted regression."""
    tests = (
        breusch_godfrey(r, bg_lags),
        arch_lm(r, arch_lags),
        breusch_pagan(r),
        jarque_bera(r.residuals),
        ramsey_reset(r, reset_powers),
    )
    return DiagnosticReport(tests=tests, cusum=cusum(r, level), cusumsq=cusumsq(r, level))


def granger_causality(ds: Dataset, cause: str, effect: str, max_lag: int = 2) -> TestResult:
    """F test of the cause's lags in the effect's autoregression.

    Both series must already be stationary (difference upstream as needed).
    When ``cause == effect`` the own-lag block doubles as the tested block
    and the restricted model is the constant alone; that degenerate form
    exists for smoke checks, not inference.
    """
    if max_lag < 1:
        raise UnsupportedCase(f"max_lag={max_lag} must be >= 1")
    yv = np.asarray(ds.get(effect).values, dtype=float)
    xv = np.asarray(ds.get(cause).values, dtype=float)
    n = len(yv)
    L = max_lag
    rows = n - L
    k_u = 1 + (L if cause == effect else 2 * L)
    if rows <= k_u + 1:
        raise TooShort(f"{rows} usable rows for {k_u} parameters")

    dep = yv[L:]
    own = {f"{effect}_l{j}": yv[L - j : n - j] for j in range(1, L + 1)}
    if cause == effect:
        unrestricted, restricted, tested = own, {}, list(own)
    else:
        cause_lags = {f"{cause}_l{j}": xv[L - j : n - j] for j in range(1, L + 1)}
        unrestricted = {**own, **cause_lags}
        restricted = own
        tested = list(cause_lags)

    fit_u = ols_fit(dep, unrestricted, intercept=True)
    fit_r = ols_fit(dep, restricted, intercept=True)
    q = len(tested)
    dof = fit_u.dof
    num = (fit_r.rss - fit_u.rss) / q
    den = fit_u.rss / dof
    stat = max(num / den, 0.0) if den > 0 else np.inf
    return TestResult(
        name="granger",
        statistic=float(stat),
        p_value=float(stats.f.sf(stat, q, dof)),
        distribution=f"F({q}, {dof})",
        params={"cause": cause, "effect": effect, "max_lag": L, "nobs": rows},
    )
