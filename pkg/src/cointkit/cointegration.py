"""Level-relationship tests and long-run estimation.

Three routes to the same question (is there a stable long-run relation
between y and the x's?) plus one refinement estimator:

* :func:`ardl_bounds_test` - F test on the lagged levels in a conditional
  error-correction regression, judged against the Pesaran-Shin-Smith (2001)
  case III bound pairs.
* :func:`engle_granger_test` - no-deterministics Dickey-Fuller regression on
  the residuals of the static long-run OLS fit.
* :func:`dols_fit` - the long-run equation augmented with leads and lags of
  the differenced regressors, HAC standard errors on the level coefficients.

The bounds tables are asymptotic; at n near 30 the F statistic runs hot, so
inconclusive-region calls deserve caution (documented, not corrected: no
finite-sample bound tables are embedded).

The Engle-Granger result carries two conventions at once. ``crit_values``
holds the finite-sample critical values adjusted for the number of
regressors (the correct yardstick for a residual-based test, and the one a
Monte Carlo under the no-cointegration null is sized against), while
``p_value`` comes from the plain no-deterministics Dickey-Fuller response
surface, the convention applied series-by-series in the replication target.
The two disagree exactly when the k-adjustment matters; both are reported so
neither is silently hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tables
from .errors import (
    IntegrationOrderViolation,
    InvalidLag,
    SampleTooSmall,
    SeriesError,
    TooShort,
    UnsupportedCase,
)
from .regress import (
    RegressionResult,
    newey_west_lag,
    ols_fit,
    robust_covariance,
    wald_joint,
)
from .results import TestResult
from .series import AnnualSeries
from .unitroot import _adf_tau, _aic_lag, default_max_lag


@dataclass(frozen=True)
class BoundsResult:
    """Outcome of the conditional-ECM bounds test.

    Attributes
    ----------
    f_statistic : float
        Wald F on the joint nullity of every lagged-level coefficient.
    k : int
        Number of long-run regressors (unrestricted exogenous terms such as
        break dummies are excluded).
    case : int
        Deterministic case of the bound tables (3 = unrestricted intercept,
        no trend).
    critical_bounds : dict
        level -> (I0, I1) bound pair.
    lags : tuple
        Selected (p, q): autoregressive and common distributed lag order.
    nobs : int
        Observations in the selected regression.
    regression : RegressionResult
        The fitted conditional error-correction model.
    """

    f_statistic: float
    k: int
    case: int
    critical_bounds: dict
    lags: tuple
    nobs: int
    regression: RegressionResult

    def verdict(self, level: float = 0.05) -> str:
        try:
            i0, i1 = self.critical_bounds[level]
        except KeyError:
            raise UnsupportedCase(
                f"level {level} not tabulated; have {sorted(self.critical_bounds)}"
            ) from None
        if self.f_statistic > i1:
            return "cointegrated"
        if self.f_statistic < i0:
            return "not_cointegrated"
        return "inconclusive"

    @property
    def verdicts(self) -> dict:
        return {lv: self.verdict(lv) for lv in sorted(self.critical_bounds)}


@dataclass(frozen=True)
class DolsResult:
    """Long-run fit with lead/lag difference terms partialled in.

    The full regression (including the lead/lag nuisance block) is kept in
    ``regression``; the reported long-run table contains only the intercept
    and the level coefficients.
    """

    regression: RegressionResult
    leads: int
    lags: int
    long_run_names: tuple

    def coef(self, name: str) -> float:
        return self.regression.coef(name)

    def long_run_table(self) -> list:
        keep = set(self.long_run_names)
        return [row for row in self.regression.inference_table() if row["name"] in keep]


def pesaran_critical_values(k: int, case: int = 3, level: float = 0.05) -> tuple:
    """Published asymptotic bound pair (I0, I1) for k regressors.

    Only case III (unrestricted intercept, no trend) is tabulated; k must be
    1..10 and level one of the tabulated significance levels
    (0.01, 0.025, 0.05, 0.10).
    """
    if not 1 <= k <= 10:
        raise UnsupportedCase(f"k={k} outside 1..10")
    bounds = tables.pesaran_bounds(k, case)
    try:
        return bounds[level]
    except KeyError:
        raise UnsupportedCase(f"level {level} not tabulated; have {sorted(bounds)}") from None


def _aligned(y, xs):
    """Common (values, names, matrix, years, yname) view of y and the x's."""
    names = tuple(xs)
    if isinstance(y, AnnualSeries):
        yv = np.asarray(y.values, dtype=float)
        years = np.asarray(y.years, dtype=int)
        yname = y.name
    else:
        yv = np.asarray(y, dtype=float)
        years = np.arange(len(yv))
        yname = "y"
    cols = []
    for nm in names:
        v = xs[nm]
        if isinstance(v, AnnualSeries):
            if isinstance(y, AnnualSeries) and (v.start != y.start or v.end != y.end):
                raise SeriesError(
                    f"{nm}: span {v.start}-{v.end} differs from {yname} {y.start}-{y.end}"
                )
            v = v.values
        v = np.asarray(v, dtype=float)
        if len(v) != len(yv):
            raise SeriesError(f"{nm}: length {len(v)} != {len(yv)}")
        cols.append(v)
    xmat = np.column_stack(cols) if cols else np.empty((len(yv), 0))
    return yv, names, xmat, years, yname


def _cecm_design(yv, xmat, names, yname, p_star, q_star, exog, start):
    """Columns of the conditional ECM using dy rows start..end.

    Row r of the sample is calendar index t = start + 1 + r in the level
    arrays; ``start`` must be >= max(p_star, q_star) so every lagged
    difference exists.
    """
    dy = np.diff(yv)
    dx = np.diff(xmat, axis=0)
    m = len(dy) - start
    design = {}
    for i in range(1, p_star + 1):
        design[f"d_{yname}_l{i}"] = dy[start - i : start - i + m]
    for j, nm in enumerate(names):
        for i in range(q_star + 1):
            key = f"d_{nm}" if i == 0 else f"d_{nm}_l{i}"
            design[key] = dx[start - i : start - i + m, j]
    design[f"{yname}_l1"] = yv[start : start + m]
    for j, nm in enumerate(names):
        design[f"{nm}_l1"] = xmat[start : start + m, j]
    for nm, col in exog.items():
        design[nm] = np.asarray(
            col.values if isinstance(col, AnnualSeries) else col, dtype=float
        )[start + 1 : start + 1 + m]
    return design, dy[start:]


def ardl_bounds_test(
    y,
    xs,
    p: int = 2,
    q: int = 2,
    case: int = 3,
    exog=None,
    integration_orders=None,
) -> BoundsResult:
    """Bounds test for a level relationship (conditional-ECM F test).

    Parameters
    ----------
    y : AnnualSeries or array
        Dependent variable in levels.
    xs : mapping of name -> AnnualSeries or array
        Long-run forcing variables in levels; their count is k.
    p, q : int
        Maximum autoregressive lag (selected over 1..p) and maximum common
        distributed lag (selected over 0..q), both by AIC on the common
        sample.
    case : int
        Deterministic case; only 3 is supported.
    exog : mapping, optional
        Unrestricted exogenous terms (break dummies); not counted in k and
        not restricted under the null.
    integration_orders : mapping, optional
        Caller's attested integration order per variable name (int order or
        an "I0"/"I1"/"I2"/"ambiguous" label); any order above 1 raises
        IntegrationOrderViolation. Omit to attest implicitly.

    Returns
    -------
    BoundsResult
        F statistic on the lagged levels jointly, selected lags, bound pairs
        and per-level verdicts.
    """
    yv, names, xmat, years, yname = _aligned(y, xs)
    k = len(names)
    if k < 1:
        raise UnsupportedCase("bounds test needs at least one regressor")
    if p < 1 or q < 0:
        raise InvalidLag(f"need p >= 1 and q >= 0, got p={p}, q={q}")
    exog = dict(exog) if exog else {}

    if integration_orders:
        for nm in (yname, *names):
            order = integration_orders.get(nm)
            if order is None:
                continue
            if isinstance(order, str):
                order = {"I0": 0, "I1": 1, "I2": 2, "ambiguous": 1}.get(order, 2)
            if order > 1:
                raise IntegrationOrderViolation(
                    f"{nm}: integration order {integration_orders[nm]!r} above I(1)"
                )

    n = len(yv)
    start_sel = max(p, q)
    m_sel = n - 1 - start_sel
    k_max = 1 + p + (q + 1) * k + (k + 1) + len(exog)
    if m_sel <= k_max + 1:
        raise SampleTooSmall(
            f"n={n} leaves {m_sel} usable rows for up to {k_max} parameters"
        )

    best = None
    for p_star in range(1, p + 1):
        for q_star in range(q + 1):
            design, dyv = _cecm_design(yv, xmat, names, yname, p_star, q_star, exog, start_sel)
            fit = ols_fit(dyv, design, intercept=True)
            aic = fit.n * np.log(max(fit.rss, 1e-300) / fit.n) + 2.0 * fit.k
            if best is None or aic < best[0] - 1e-12:
                best = (aic, p_star, q_star)
    _, p_star, q_star = best

    start = max(p_star, q_star)
    design, dyv = _cecm_design(yv, xmat, names, yname, p_star, q_star, exog, start)
    fit = ols_fit(dyv, design, intercept=True, years=years[start + 1 :])
    restricted = [f"{yname}_l1"] + [f"{nm}_l1" for nm in names]
    f_stat = wald_joint(fit, restricted).statistic

    return BoundsResult(
        f_statistic=float(f_stat),
        k=k,
        case=case,
        critical_bounds=tables.pesaran_bounds(k, case),
        lags=(p_star, q_star),
        nobs=fit.n,
        regression=fit,
    )


def engle_granger_test(y, xs, max_lag: int | None = None) -> TestResult:
    """Residual-based cointegration test on the static long-run fit.

    A no-deterministics Dickey-Fuller regression (AIC-chosen augmentation)
    is run on the OLS residuals of y on the x's plus intercept. See the
    module docstring for the two conventions carried by the result:
    ``p_value`` from the plain response surface, ``crit_values`` adjusted
    for the k regressors.
    """
    yv, names, xmat, years, yname = _aligned(y, xs)
    k = len(names)
    longrun = ols_fit(yv, dict(zip(names, xmat.T)), intercept=True, years=years)
    e = longrun.residuals
    n = len(e)
    if max_lag is None:
        max_lag = default_max_lag(n)
    if n < 10 + max_lag:
        raise TooShort(f"needs >= {10 + max_lag} observations, have {n}")

    scale = max(1.0, float(np.max(np.abs(yv))))
    if float(np.sqrt(np.mean(e**2))) < 1e-12 * scale:
        # perfect fit: residuals are pure roundoff, maximal evidence against
        # the no-cointegration null
        return TestResult(
            name="engle-granger",
            statistic=-np.inf,
            p_value=0.0,
            distribution="dickey-fuller (no deterministics)",
            crit_values=tables.mackinnon_crit("c", k + 1, nobs=n - 1),
            params={"k": k, "lag": 0, "nobs": n - 1, "degenerate": True},
        )

    lag = _aic_lag(e, "n", max_lag)
    tau, _, nobs, _ = _adf_tau(e, "n", lag, start=lag)
    p = tables.mackinnon_pvalue_finite(tau, regression="n", n_series=1, nobs=nobs)
    return TestResult(
        name="engle-granger",
        statistic=float(tau),
        p_value=float(p),
        distribution="dickey-fuller (no deterministics)",
        crit_values=tables.mackinnon_crit("c", k + 1, nobs=nobs),
        params={"k": k, "lag": lag, "nobs": nobs},
    )


def dols_fit(y, xs, leads: int = 1, lags: int = 1, hac_lag: int | None = None) -> DolsResult:
    """Long-run OLS with leads and lags of the differenced regressors.

    With ``leads = lags = 0`` no difference terms are added at all and the
    fit is the plain static regression on the full sample (coefficients
    identical to :func:`ols_fit`). Otherwise the regression gains
    one block of difference terms per regressor covering offsets
    -leads..+lags (contemporaneous included), the usable sample becomes
    rows lags+1 .. n-1-leads, and the covariance is HAC (Bartlett kernel,
    automatic truncation unless ``hac_lag`` is given).
    """
    if leads < 0 or lags < 0:
        raise InvalidLag(f"leads={leads}, lags={lags} must be nonnegative")
    yv, names, xmat, years, _ = _aligned(y, xs)
    n, k = len(yv), len(names)
    if k < 1:
        raise UnsupportedCase("dols needs at least one regressor")

    if leads == 0 and lags == 0:
        fit = ols_fit(yv, dict(zip(names, xmat.T)), intercept=True, years=years)
        fit = robust_covariance(fit, "HAC", lag=hac_lag)
        return DolsResult(
            regression=fit, leads=0, lags=0, long_run_names=tuple(fit.names[:1]) + names
        )

    t0, t1 = lags + 1, n - 1 - leads
    m = t1 - t0 + 1
    k_total = 1 + k + k * (leads + lags + 1)
    if m <= k_total + 1:
        raise SampleTooSmall(
            f"n={n} with leads={leads}, lags={lags} leaves {m} rows for {k_total} parameters"
        )

    dx = np.diff(xmat, axis=0)  # dx[i] is the change arriving at level index i+1
    design = {}
    for j, nm in enumerate(names):
        design[nm] = xmat[t0 : t1 + 1, j]
    for j, nm in enumerate(names):
        for i in range(-leads, lags + 1):
            if i < 0:
                key = f"d_{nm}_f{-i}"
            elif i == 0:
                key = f"d_{nm}"
            else:
                key = f"d_{nm}_l{i}"
            design[key] = dx[t0 - 1 - i : t0 - 1 - i + m, j]

    fit = ols_fit(yv[t0 : t1 + 1], design, intercept=True, years=years[t0 : t1 + 1])
    fit = robust_covariance(fit, "HAC", lag=hac_lag if hac_lag is not None else newey_west_lag(m))
    return DolsResult(
        regression=fit, leads=leads, lags=lags, long_run_names=tuple(fit.names[:1]) + names
    )
