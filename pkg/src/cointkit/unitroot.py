"""Unit-root tests (ADF, PP, KPSS, Zivot-Andrews) and integration classifier.

All p-values come from the embedded tables module: MacKinnon response
surfaces for tau statistics (recentered with the finite-sample critical
value regressions, so Monte Carlo sizes stay honest at n near 30),
interpolated critical-value tables for KPSS and the break-aware
minimum-tau test. Documented p-value precision of the response surfaces
is about +/-0.02.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tables
from .errors import (
    MissingResults,
    RankDeficient,
    SingularRegression,
    TooShort,
    UnsupportedCase,
)
from .series import AnnualSeries

_DET_LABEL = {"n": "none", "c": "constant", "ct": "constant+trend"}


@dataclass(frozen=True)
class UnitRootResult:
    """Outcome of a unit-root or stationarity test."""

    test_name: str
    statistic: float
    p_value: float
    lags_used: int
    deterministic_terms: str
    p_bound: str | None = None
    break_year: int | None = None
    crit_values: dict = field(default_factory=dict)

    def rejects(self, level: float) -> bool:
        if self.p_bound == "le":
            return self.p_value <= level
        return self.p_value < level

    @property
    def verdicts(self) -> dict:
        return {lv: self.rejects(lv) for lv in (0.01, 0.05, 0.10)}


def default_max_lag(n: int) -> int:
    """Schwert bound floor(12*(n/100)^(1/4)), capped at n/8 in small samples.

    For n=32 the cap binds and the default is 4.
    """
    schwert = int(np.floor(12.0 * (n / 100.0) ** 0.25))
    return max(0, min(schwert, n // 8))


def bartlett_lag(n: int) -> int:
    """Automatic long-run-variance lag floor(4*(n/100)^(2/9))."""
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _values(s) -> np.ndarray:
    return np.asarray(s.values if isinstance(s, AnnualSeries) else s, dtype=float)


def _det_cols(det: str, n: int, offset: int = 0) -> list:
    if det == "n":
        return []
    if det == "c":
        return [np.ones(n)]
    if det == "ct":
        return [np.ones(n), np.arange(offset + 1, offset + n + 1, dtype=float)]
    raise UnsupportedCase(f"deterministic terms {det!r} not in ('n','c','ct')")


def _lstsq(X: np.ndarray, y: np.ndarray):
    """Solve by QR; returns (beta, resid, rss, xtx_inv). Raises SingularRegression."""
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() <= max(X.shape) * np.finfo(float).eps * diag.max():
        raise SingularRegression("testing regression is singular")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    Rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    return beta, resid, rss, Rinv @ Rinv.T


def _adf_design(y: np.ndarray, det: str, lag: int, start: int):
    """Rows start..end of the ADF regression at the given augmentation lag.

    ``start`` indexes dy (so the usable sample is common across lag
    candidates when start = max_lag). Column 0 after the deterministic block
    is the lagged level.
    """
    dy = np.diff(y)
    n = len(dy) - start
    cols = _det_cols(det, n)
    cols.append(y[start : start + n])
    for j in range(1, lag + 1):
        cols.append(dy[start - j : start - j + n])
    X = np.column_stack(cols)
    return X, dy[start:], len(_det_cols(det, 1))


def _adf_tau(y: np.ndarray, det: str, lag: int, start: int):
    X, dyv, det_k = _adf_design(y, det, lag, start)
    n, k = X.shape
    if n <= k:
        raise TooShort(f"adf regression has n={n} <= k={k}")
    beta, resid, rss, xtx_inv = _lstsq(X, dyv)
    sigma2 = rss / (n - k)
    se = np.sqrt(sigma2 * xtx_inv[det_k, det_k])
    tau = float(beta[det_k] / se)
    return tau, rss, n, k


def _aic_lag(y: np.ndarray, det: str, max_lag: int) -> int:
    """AIC lag choice on the common sample that holds out max_lag rows."""
    best_lag, best_aic = 0, np.inf
    for lag in range(max_lag + 1):
        X, dyv, _ = _adf_design(y, det, lag, max_lag)
        n, k = X.shape
        if n <= k:
            continue
        _, _, rss, _ = _lstsq(X, dyv)
        aic = n * np.log(max(rss, 1e-300) / n) + 2.0 * k
        if aic < best_aic - 1e-12:
            best_aic, best_lag = aic, lag
    return best_lag


def adf_test(
    s,
    det: str = "c",
    max_lag: int | None = None,
    selection: str = "AIC",
    lag: int | None = None,
) -> UnitRootResult:
    """Augmented Dickey-Fuller test.

    Parameters
    ----------
    s : AnnualSeries or array
    det : {"c", "ct", "n"}
        Deterministic terms in the testing regression.
    max_lag : int, optional
        Upper bound for AIC lag selection; defaults to the Schwert bound
        capped for small samples (4 at n=32).
    selection : {"AIC", "fixed"}
        With "fixed", ``lag`` gives the augmentation order directly.
    """
    y = _values(s)
    if max_lag is None:
        max_lag = default_max_lag(len(y))
    if len(y) < 10 + max_lag:
        raise TooShort(f"adf needs >= {10 + max_lag} observations, have {len(y)}")

    if selection == "fixed":
        used = int(lag if lag is not None else max_lag)
    elif selection == "AIC":
        used = _aic_lag(y, det, max_lag)
    else:
        raise UnsupportedCase(f"selection {selection!r} not in ('AIC','fixed')")

    tau, _, nobs, _ = _adf_tau(y, det, used, start=used)
    p = tables.mackinnon_pvalue_finite(tau, regression=det, n_series=1, nobs=nobs)
    crit = tables.mackinnon_crit(regression=det, n_series=1, nobs=nobs)
    return UnitRootResult(
        test_name="adf",
        statistic=tau,
        p_value=p,
        lags_used=used,
        deterministic_terms=_DET_LABEL[det],
        crit_values=crit,
    )


def _bartlett_lrv(u: np.ndarray, lag: int) -> float:
    n = len(u)
    g0 = float(u @ u) / n
    lrv = g0
    for j in range(1, lag + 1):
        gj = float(u[j:] @ u[:-j]) / n
        lrv += 2.0 * (1.0 - j / (lag + 1.0)) * gj
    return lrv


def pp_test(s, det: str = "c", lag: int | None = None) -> UnitRootResult:
    """Phillips-Perron Z-tau test with Bartlett long-run variance."""
    y = _values(s)
    if len(y) < 12:
        raise TooShort(f"pp needs >= 12 observations, have {len(y)}")

    X, dyv, det_k = _adf_design(y, det, 0, 0)
    n, k = X.shape
    beta, u, rss, xtx_inv = _lstsq(X, dyv)
    s2 = rss / (n - k)
    se_rho = float(np.sqrt(s2 * xtx_inv[det_k, det_k]))
    tau = float(beta[det_k] / se_rho)

    L = bartlett_lag(n) if lag is None else int(lag)
    g0 = float(u @ u) / n
    lam2 = _bartlett_lrv(u, L)
    if lam2 <= 0:
        raise SingularRegression("long-run variance is not positive")
    z_tau = tau * np.sqrt(g0 / lam2) - (lam2 - g0) * n * se_rho / (
        2.0 * np.sqrt(lam2) * np.sqrt(s2)
    )

    p = tables.mackinnon_pvalue_finite(float(z_tau), regression=det, n_series=1, nobs=n)
    crit = tables.mackinnon_crit(regression=det, n_series=1, nobs=n)
    return UnitRootResult(
        test_name="pp",
        statistic=float(z_tau),
        p_value=p,
        lags_used=L,
        deterministic_terms=_DET_LABEL[det],
        crit_values=crit,
    )


def kpss_test(s, det: str = "c", lag: int | None = None) -> UnitRootResult:
    """KPSS stationarity test (null: stationary around the deterministic part)."""
    y = _values(s)
    n = len(y)
    if n < 12:
        raise TooShort(f"kpss needs >= 12 observations, have {n}")
    if det not in ("c", "ct"):
        raise UnsupportedCase("kpss supports det in ('c','ct')")

    X = np.column_stack(_det_cols(det, n))
    beta, e, _, _ = _lstsq(X, y)
    S = np.cumsum(e)
    L = bartlett_lag(n) if lag is None else int(lag)
    lam2 = _bartlett_lrv(e, L)
    # residuals that are zero up to roundoff make the LM ratio pure noise
    noise = 1e-12 * max(1.0, float(np.max(np.abs(y))))
    if lam2 <= 0 or np.sqrt(np.mean(e**2)) < noise:
        stat = 0.0
    else:
        stat = float(np.sum(S**2) / (n**2 * lam2))

    p, bound = tables.kpss_pvalue(stat, regression=det)
    return UnitRootResult(
        test_name="kpss",
        statistic=stat,
        p_value=p,
        lags_used=L,
        deterministic_terms=_DET_LABEL[det],
        p_bound=bound,
        crit_values=tables.kpss_crit(det),
    )


_ZA_MODELS = {"intercept", "trend", "both"}


def za_test(
    s,
    model: str = "intercept",
    trim: float = 0.15,
    max_lag: int | None = None,
) -> UnitRootResult:
    """Break-aware unit-root test: minimum tau over candidate break years.

    The null is a unit root; the alternative is stationarity around a
    one-time break. ``model`` chooses what breaks: the intercept, the trend
    slope, or both. The break year reported is the first year of the new
    regime, and candidates are restricted to the trimmed sample interior.
    The search is exhaustive over candidates and lag choice is by AIC per
    candidate, so reruns are bit-identical.

    The default augmentation cap is 1: annual series need little
    augmentation, and because the minimum is taken over every candidate
    break, lag-selection noise compounds into serious over-rejection against
    the published critical values if the cap is loose.
    """
    if model not in _ZA_MODELS:
        raise UnsupportedCase(f"model {model!r} not in {sorted(_ZA_MODELS)}")
    if not 0.0 < trim <= 0.25:
        raise UnsupportedCase(f"trim {trim} outside (0, 0.25]")
    y = _values(s)
    n = len(y)
    if n < 20:
        raise TooShort(f"za needs >= 20 observations, have {n}")
    years = s.years if isinstance(s, AnnualSeries) else np.arange(n)
    if max_lag is None:
        max_lag = 1

    lo = max(int(np.ceil(trim * n)), 2)
    hi = min(int(np.floor((1.0 - trim) * n)), n - 2)
    dy = np.diff(y)

    best = (np.inf, None, 0)
    for tb in range(lo, hi + 1):
        # regime dummy: observation index >= tb belongs to the new regime
        du = (np.arange(n) >= tb).astype(float)
        dt = np.maximum(0.0, np.arange(n) - tb + 1.0)
        best_cand = None
        for lag in range(max_lag + 1):
            start = lag
            m = len(dy) - start
            cols = [np.ones(m), np.arange(1, m + 1, dtype=float)]
            if model in ("intercept", "both"):
                cols.append(du[start + 1 :])
            if model in ("trend", "both"):
                cols.append(dt[start + 1 :])
            cols.append(y[start:-1])
            pos = len(cols) - 1
            for j in range(1, lag + 1):
                cols.append(dy[start - j : len(dy) - j])
            X = np.column_stack(cols)
            if X.shape[0] <= X.shape[1]:
                continue
            try:
                beta, resid, rss, xtx_inv = _lstsq(X, dy[start:])
            except SingularRegression:
                continue
            nn, kk = X.shape
            aic = nn * np.log(max(rss, 1e-300) / nn) + 2.0 * kk
            se = np.sqrt(rss / (nn - kk) * xtx_inv[pos, pos])
            tau = float(beta[pos] / se)
            if best_cand is None or aic < best_cand[0] - 1e-12:
                best_cand = (aic, tau, lag)
        if best_cand is not None:
            _, tau, lag = best_cand
            if tau < best[0]:
                best = (tau, tb, lag)

    if best[1] is None:
        raise SingularRegression("no admissible break candidate produced a fit")

    stat, tb, lag = best
    p, bound = tables.za_pvalue(stat, model=model)
    return UnitRootResult(
        test_name="za",
        statistic=float(stat),
        p_value=p,
        lags_used=lag,
        deterministic_terms="constant+trend",
        p_bound=bound,
        break_year=int(years[tb]),
        crit_values=tables.za_crit(model),
    )


def classify_integration(level, diff) -> str:
    """Majority-rule integration order from level and first-difference tests.

    Both inputs need ADF, PP and KPSS results. A series counts as stationary
    when at least 2 of {ADF rejects, PP rejects, KPSS fails to reject} hold,
    at the 5% level for levels and the 10% level for differences (annual
    samples this short leave differences underpowered at 5%).

    Returns one of "I0", "I1", "I2", "ambiguous"; the ambiguous label marks
    the contradictory case of a stationary level with a nonstationary
    difference.
    """

    def by_name(results):
        d = {}
        for r in results:
            d[r.test_name] = r
        missing = {"adf", "pp", "kpss"} - set(d)
        if missing:
            raise MissingResults(f"missing tests: {sorted(missing)}")
        return d

    lv, df = by_name(level), by_name(diff)

    def stationary(res, alpha):
        signals = [
            res["adf"].rejects(alpha),
            res["pp"].rejects(alpha),
            not res["kpss"].rejects(alpha),
        ]
        return sum(signals) >= 2

    level_st = stationary(lv, 0.05)
    diff_st = stationary(df, 0.10)
    if level_st and diff_st:
        return "I0"
    if level_st:
        return "ambiguous"
    if diff_st:
        return "I1"
    return "I2"
