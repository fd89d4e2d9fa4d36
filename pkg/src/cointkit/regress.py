"""Linear-regression engine: OLS, HAC/HC covariance, VIF, Wald, bootstrap CIs.

All downstream estimators (long-run equations, conditional ECMs, diagnostic
auxiliaries) route through :func:`ols_fit`, which solves the least-squares
problem by QR decomposition rather than the normal equations: at n near 30
with near-collinear composite indices the extra numerical headroom matters.

Coefficient p-values always use the t distribution with n-k degrees of
freedom, whatever the covariance kind; the sample sizes here are far too
small for normal approximations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import (
    InvalidLag,
    RankDeficient,
    TooFewObservations,
    TooFewReps,
    UnknownName,
)
from .results import TestResult
from .series import AnnualSeries

CONST = "const"


def newey_west_lag(n: int) -> int:
    """Automatic Bartlett truncation lag, floor(4 * (n/100)^(2/9))."""
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _as_values(obj) -> np.ndarray:
    if isinstance(obj, AnnualSeries):
        return np.asarray(obj.values, dtype=float)
    return np.asarray(obj, dtype=float)


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Fitted linear model with its design kept for covariance swaps."""

    names: tuple
    params: np.ndarray
    cov: np.ndarray
    cov_kind: str
    X: np.ndarray
    y: np.ndarray
    years: np.ndarray
    rss: float
    r_squared: float
    intercept: bool

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def k(self) -> int:
        return self.X.shape[1]

    @property
    def dof(self) -> int:
        return self.n - self.k

    @property
    def fitted(self) -> np.ndarray:
        return self.X @ self.params

    @property
    def residuals(self) -> np.ndarray:
        return self.y - self.fitted

    def residual_series(self, name: str = "resid") -> AnnualSeries:
        return AnnualSeries(name, self.years, self.residuals)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def tvalues(self) -> np.ndarray:
        return self.params / self.se

    @property
    def pvalues(self) -> np.ndarray:
        return 2.0 * stats.t.sf(np.abs(self.tvalues), self.dof)

    def coef(self, name: str) -> float:
        return float(self.params[self._index(name)])

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownName(f"no coefficient named {name!r}; have {self.names}") from None

    def coefficients(self) -> dict:
        return {n: float(b) for n, b in zip(self.names, self.params)}

    def inference_table(self) -> list:
        """Rows of (name, coef, se, t, p), ready for printing."""
        return [
            {"name": n, "coef": float(b), "se": float(s), "t": float(t), "p": float(p)}
            for n, b, s, t, p in zip(self.names, self.params, self.se, self.tvalues, self.pvalues)
        ]


def _qr_solve(X: np.ndarray, y: np.ndarray, names) -> tuple:
    """Least squares via QR; raises RankDeficient naming near-collinear columns."""
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    tol = max(X.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    bad = np.flatnonzero(diag <= tol)
    if bad.size:
        cols = [names[i] for i in bad]
        raise RankDeficient(f"design matrix is rank deficient at columns {cols}", columns=cols)
    beta = np.linalg.solve(R, Q.T @ y)
    return beta, Q, R


def ols_fit(y, X, intercept: bool = True, years=None) -> RegressionResult:
    """Ordinary least squares with classical covariance.

    Parameters
    ----------
    y : AnnualSeries or array
        Dependent variable.
    X : mapping of name -> AnnualSeries or array
        Regressors, in insertion order. May be empty only if ``intercept``.
    intercept : bool
        Prepend a constant column named ``"const"``.
    years : array, optional
        Calendar years for the residual series; taken from ``y`` when it is
        an AnnualSeries, else 0..n-1.

    Raises
    ------
    RankDeficient
        Lists the near-collinear column names.
    TooFewObservations
        If n <= k.
    """
    yv = _as_values(y)
    if years is None:
        years = y.years if isinstance(y, AnnualSeries) else np.arange(len(yv))
    years = np.asarray(years, dtype=int)

    names = ([CONST] if intercept else []) + list(X)
    cols = ([np.ones(len(yv))] if intercept else []) + [_as_values(v) for v in X.values()]
    if not cols:
        raise TooFewObservations("no regressors and no intercept")
    for nm, c in zip(names, cols):
        if len(c) != len(yv):
            raise TooFewObservations(f"regressor {nm!r} length {len(c)} != n {len(yv)}")
    Xm = np.column_stack(cols)

    n, k = Xm.shape
    if n <= k:
        raise TooFewObservations(f"n={n} <= k={k}")

    beta, Q, R = _qr_solve(Xm, yv, names)
    resid = yv - Xm @ beta
    rss = float(resid @ resid)
    if intercept:
        tss = float(np.sum((yv - yv.mean()) ** 2))
    else:
        tss = float(yv @ yv)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0

    sigma2 = rss / (n - k)
    Rinv = np.linalg.solve(R, np.eye(k))
    xtx_inv = Rinv @ Rinv.T
    cov = sigma2 * xtx_inv

    return RegressionResult(
        names=tuple(names),
        params=beta,
        cov=cov,
        cov_kind="classical",
        X=Xm,
        y=yv,
        years=years,
        rss=rss,
        r_squared=r2,
        intercept=intercept,
    )


def _xtx_inv(X: np.ndarray) -> np.ndarray:
    _, R = np.linalg.qr(X)
    Rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    return Rinv @ Rinv.T


def robust_covariance(r: RegressionResult, kind: str, lag: int | None = None) -> RegressionResult:
    """Replace the covariance with a heteroskedasticity/autocorrelation-robust one.

    ``kind`` is one of ``"HC0"``, ``"HC1"``, ``"HAC"``. For HAC the Bartlett
    kernel w_j = 1 - j/(L+1) is used with truncation ``lag`` (default: the
    automatic Newey-West lag for the sample size). No degrees-of-freedom
    correction is applied to HAC, so HAC with lag 0 coincides with HC0.
    """
    X, e = r.X, r.residuals
    n, k = X.shape
    A = _xtx_inv(X)
    Xe = X * e[:, None]

    if kind == "HC0" or kind == "HC1":
        meat = Xe.T @ Xe
        cov = A @ meat @ A
        if kind == "HC1":
            cov = cov * (n / (n - k))
        return replace(r, cov=cov, cov_kind=kind)

    if kind == "HAC":
        L = newey_west_lag(n) if lag is None else int(lag)
        if L < 0 or L >= n:
            raise InvalidLag(f"HAC lag {L} outside [0, {n - 1}]")
        meat = Xe.T @ Xe
        for j in range(1, L + 1):
            w = 1.0 - j / (L + 1.0)
            G = Xe[j:].T @ Xe[:-j]
            meat += w * (G + G.T)
        cov = A @ meat @ A
        return replace(r, cov=cov, cov_kind=f"HAC({L})")

    raise InvalidLag(f"unknown covariance kind {kind!r}")


def vif(X) -> dict:
    """Variance inflation factors from auxiliary regressions with intercept.

    Raises RankDeficient if an auxiliary fit is degenerate or fewer than two
    regressors are supplied.
    """
    names = list(X)
    if len(names) < 2:
        raise RankDeficient("vif needs at least 2 regressors")
    cols = {n: _as_values(v) for n, v in X.items()}
    out = {}
    for j, nm in enumerate(names):
        others = {n: cols[n] for n in names if n != nm}
        aux = ols_fit(cols[nm], others, intercept=True)
        r2 = min(aux.r_squared, 1.0 - 1e-15)
        out[nm] = float(1.0 / (1.0 - r2))
    return out


def wald_joint(r: RegressionResult, subset) -> TestResult:
    """F-form Wald test that every coefficient in ``subset`` is zero.

    Uses the result's current covariance; dof (q, n-k).
    """
    idx = [r._index(nm) for nm in subset]
    q = len(idx)
    if q == 0:
        raise UnknownName("empty coefficient subset")
    b = r.params[idx]
    V = r.cov[np.ix_(idx, idx)]
    F = float(b @ np.linalg.solve(V, b) / q)
    p = float(stats.f.sf(F, q, r.dof))
    return TestResult(
        name="wald",
        statistic=F,
        p_value=p,
        distribution=f"F({q}, {r.dof})",
        params={"subset": tuple(subset), "cov_kind": r.cov_kind},
    )


def residual_bootstrap_ci(
    y, X, reps: int = 1000, level: float = 0.95, seed: int = 0, intercept: bool = True
) -> dict:
    """Percentile confidence intervals from a fixed-design residual bootstrap.

    Residuals are resampled with replacement (centered first, a no-op when an
    intercept is present), new responses are formed around the fitted values,
    and the model is refit on the unchanged design. All resampling indices
    are drawn up front from one generator, so results are reproducible given
    the seed and independent of any execution order.
    """
    if reps < 100:
        raise TooFewReps(f"reps={reps} < 100")
    base = ols_fit(y, X, intercept=intercept)
    e = base.residuals - base.residuals.mean()
    n = base.n

    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(reps, n))
    Ystar = base.fitted[None, :] + e[idx]

    Q, R = np.linalg.qr(base.X)
    B = np.linalg.solve(R, Q.T @ Ystar.T)  # k x reps

    alpha = (1.0 - level) / 2.0
    lo = np.quantile(B, alpha, axis=1)
    hi = np.quantile(B, 1.0 - alpha, axis=1)
    return {nm: (float(a), float(b)) for nm, a, b in zip(base.names, lo, hi)}
