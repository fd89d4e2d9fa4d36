"""Univariate forecasters, penalized and boosted learners, holdout scoring.

Univariate models (ARIMA by conditional sum of squares, additive damped-trend
exponential smoothing, a two-line Theta) forecast a single series over a
multi-year horizon. Supervised learners (ridge, lasso, elastic net, gradient
boosted trees) fit on a leakage-free matrix of lagged features and return a
one-step-ahead forecast for the first year after the feature window, whose
lagged features are already observed.

Holdout evaluation refits on the pre-holdout years only and scores MAPE on
back-transformed levels and RMSE on the modelling (often ln) scale; the two
metrics deliberately live on different scales.

All fits are deterministic given the data and settings: optimizer starts are
fixed, boosting uses no row subsampling, and grids are fixed constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    GridExhausted,
    InvalidLag,
    NoConvergence,
    NonInvertible,
    OptimFailed,
    TooShort,
    UnsupportedCase,
)
from .results import ForecastResult
from .series import AnnualSeries, Dataset
from .unitroot import adf_test

#: Fixed penalty grid for leave-future-out validation.
LAMBDA_GRID = tuple(float(v) for v in np.logspace(-3.0, 2.0, 11))

_ETS_BOUNDS = ((0.01, 0.99), (0.01, 0.99), (0.8, 0.98))


def _back_transform(transformed: np.ndarray, how: str) -> np.ndarray:
    if how == "exp":
        return np.exp(transformed)
    if how == "none":
        return np.asarray(transformed, dtype=float).copy()
    raise UnsupportedCase(f"unknown back_transform {how!r}")


# ---------------------------------------------------------------------------
# ARIMA by conditional sum of squares
# ---------------------------------------------------------------------------


def _css_residuals(w: np.ndarray, c: float, phi: np.ndarray, theta: np.ndarray):
    p, q = len(phi), len(theta)
    m = max(p, q)
    e = np.zeros(len(w))
    for t in range(m, len(w)):
        pred = c
        for i in range(p):
            pred += phi[i] * w[t - 1 - i]
        for j in range(q):
            pred += theta[j] * e[t - 1 - j]
        e[t] = w[t] - pred
    return e, m


def _css_sse(params: np.ndarray, w: np.ndarray, p: int, q: int, with_const: bool):
    c = params[0] if with_const else 0.0
    off = 1 if with_const else 0
    phi = params[off : off + p]
    theta = params[off + p : off + p + q]
    e, m = _css_residuals(w, c, phi, theta)
    sse = float(e[m:] @ e[m:])
    return sse if math.isfinite(sse) else 1e300


def _poly_roots_outside(coefs: np.ndarray, sign: float) -> bool:
    """Whether 1 + sign*(c1 z + c2 z^2 + ...) has all roots outside the circle."""
    if len(coefs) == 0:
        return True
    poly = np.concatenate([[1.0], sign * np.asarray(coefs, dtype=float)])
    roots = np.roots(poly[::-1])
    return bool(np.all(np.abs(roots) > 1.0001))


def _fit_css(w: np.ndarray, p: int, q: int, with_const: bool):
    """Estimate one ARMA candidate; raises NonInvertible on bad roots."""
    n_par = (1 if with_const else 0) + p + q
    if n_par == 0:
        e, m = _css_residuals(w, 0.0, np.empty(0), np.empty(0))
        return np.empty(0), float(e[m:] @ e[m:]), len(w) - m
    start = np.zeros(n_par)
    if with_const:
        start[0] = float(np.mean(w))
    res = optimize.minimize(
        _css_sse,
        start,
        args=(w, p, q, with_const),
        method="Nelder-Mead",
        options={"maxiter": 4000, "xatol": 1e-8, "fatol": 1e-10},
    )
    params = res.x
    off = 1 if with_const else 0
    if not _poly_roots_outside(params[off : off + p], -1.0):
        raise NonInvertible(f"AR({p}) roots on or inside the unit circle")
    if not _poly_roots_outside(params[off + p : off + p + q], 1.0):
        raise NonInvertible(f"MA({q}) roots on or inside the unit circle")
    sse = _css_sse(params, w, p, q, with_const)
    m = max(p, q)
    return params, sse, len(w) - m


def arima_fit_forecast(
    s: AnnualSeries,
    horizon: int,
    order_grid=None,
    back_transform: str = "none",
) -> ForecastResult:
    """Fit a small ARIMA grid by conditional sum of squares and forecast.

    The differencing order is picked by an ADF test with constant at the 5%
    level (stationary -> d=0, else d=1) unless ``order_grid`` pins explicit
    ``(p, d, q)`` triples. Every candidate includes a constant except the
    pure random walk (0,1,0). Candidates whose AR or MA roots fall on or
    inside the unit circle are rejected and the grid continues; selection
    among survivors is by AICc. Forecasts are dynamic multi-step, with
    future shocks at zero, then integrated back when d=1.

    Parameters
    ----------
    s : AnnualSeries
        Series to forecast, at least 15 observations.
    horizon : int
        Number of years ahead.
    order_grid : iterable of (p, d, q), optional
        Explicit candidates; p, q <= 2 and d <= 1. Defaults to the full
        p, q in {0,1,2} grid at the ADF-chosen d.
    back_transform : str
        ``"none"`` (levels equal the modelling scale) or ``"exp"``.

    Returns
    -------
    ForecastResult
    """
    y = np.asarray(s.values, dtype=float)
    n = len(y)
    if n < 15:
        raise TooShort(f"arima needs >= 15 observations, have {n}")
    if horizon < 1:
        raise UnsupportedCase(f"horizon {horizon} must be >= 1")

    if order_grid is None:
        d = 0 if adf_test(s, det="c").rejects(0.05) else 1
        order_grid = [(p, d, q) for p in range(3) for q in range(3)]
    candidates = [tuple(int(v) for v in o) for o in order_grid]
    if any(p > 2 or q > 2 or d > 1 or p < 0 or q < 0 or d < 0 for p, d, q in candidates):
        raise UnsupportedCase("orders limited to p,q <= 2 and d <= 1")

    best = None
    for p, d, q in candidates:
        w = np.diff(y) if d == 1 else y.copy()
        with_const = not (p == 0 and d == 1 and q == 0)
        k = p + q + (1 if with_const else 0) + 1
        n_eff = len(w) - max(p, q)
        if n_eff - k - 1 <= 0:
            continue
        try:
            params, sse, _ = _fit_css(w, p, q, with_const)
        except NonInvertible:
            continue
        aic = n_eff * math.log(max(sse, 1e-300) / n_eff) + 2.0 * k
        aicc = aic + 2.0 * k * (k + 1) / (n_eff - k - 1)
        if best is None or aicc < best["aicc"]:
            best = {
                "order": (p, d, q),
                "params": params,
                "sse": sse,
                "aicc": aicc,
                "with_const": with_const,
                "w": w,
            }
    if best is None:
        raise GridExhausted("no ARIMA candidate survived estimation")

    p, d, q = best["order"]
    params, with_const, w = best["params"], best["with_const"], best["w"]
    c = params[0] if with_const else 0.0
    off = 1 if with_const else 0
    phi = params[off : off + p]
    theta = params[off + p : off + p + q]
    e, _ = _css_residuals(w, c, phi, theta)

    w_ext = list(w)
    e_ext = list(e)
    for _ in range(horizon):
        pred = c
        for i in range(p):
            pred += phi[i] * w_ext[-1 - i]
        for j in range(q):
            pred += theta[j] * e_ext[-1 - j]
        w_ext.append(pred)
        e_ext.append(0.0)
    future_w = np.asarray(w_ext[len(w) :])
    transformed = y[-1] + np.cumsum(future_w) if d == 1 else future_w

    return ForecastResult(
        model="arima",
        params={
            "order": (p, d, q),
            "constant": float(c) if with_const else None,
            "ar": tuple(float(v) for v in phi),
            "ma": tuple(float(v) for v in theta),
            "aicc": float(best["aicc"]),
        },
        years=np.arange(s.end + 1, s.end + 1 + horizon),
        transformed=np.asarray(transformed, dtype=float),
        levels=_back_transform(np.asarray(transformed, dtype=float), back_transform),
    )


# ---------------------------------------------------------------------------
# Damped-trend exponential smoothing
# ---------------------------------------------------------------------------


def _ets_sse(params: np.ndarray, y: np.ndarray) -> float:
    alpha, beta, phi, level, trend = params
    sse = 0.0
    for t in range(len(y)):
        f = level + phi * trend
        err = y[t] - f
        sse += err * err
        level = f + alpha * err
        trend = phi * trend + beta * err
    return sse if math.isfinite(sse) else 1e300


def ets_damped_forecast(
    s: AnnualSeries,
    horizon: int,
    phi_bounds: tuple = _ETS_BOUNDS[2],
    back_transform: str = "none",
) -> ForecastResult:
    """Additive-error, additive-damped-trend, no-season exponential smoothing.

    All five parameters (alpha, beta, phi, initial level, initial trend) are
    chosen by SSE minimization: alpha and beta over [0.01, 0.99], phi over
    ``phi_bounds`` (default [0.8, 0.98]), initials unconstrained, from 8
    deterministic multi-starts seeded at the box corners with level y[0] and
    the OLS time-trend slope. Forecasts are level + (phi + ... + phi^h) *
    trend.

    Raises
    ------
    OptimFailed
        If every start ends with a non-finite objective.
    """
    y = np.asarray(s.values, dtype=float)
    n = len(y)
    if n < 10:
        raise TooShort(f"ets needs >= 10 observations, have {n}")
    if horizon < 1:
        raise UnsupportedCase(f"horizon {horizon} must be >= 1")

    slope = float(np.polyfit(np.arange(n), y, 1)[0])
    bounds = [_ETS_BOUNDS[0], _ETS_BOUNDS[1], tuple(phi_bounds), (None, None), (None, None)]
    phi_lo, phi_hi = phi_bounds
    phi_starts = (phi_lo + 0.25 * (phi_hi - phi_lo), phi_lo + 0.75 * (phi_hi - phi_lo))
    starts = [
        np.array([a, b, f, y[0], slope])
        for a in (0.2, 0.8)
        for b in (0.05, 0.4)
        for f in phi_starts
    ]
    best = None
    for st in starts:
        res = optimize.minimize(
            _ets_sse, st, args=(y,), method="L-BFGS-B", bounds=bounds
        )
        if math.isfinite(res.fun) and res.fun < 1e299 and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise OptimFailed("all exponential-smoothing starts diverged")

    alpha, beta, phi, level, trend = best.x
    for t in range(n):
        f = level + phi * trend
        err = y[t] - f
        level = f + alpha * err
        trend = phi * trend + beta * err
    damp = np.cumsum(phi ** np.arange(1, horizon + 1))
    transformed = level + damp * trend
    return ForecastResult(
        model="ets",
        params={
            "alpha": float(alpha),
            "beta": float(beta),
            "phi": float(phi),
            "final_level": float(level),
            "final_trend": float(trend),
            "sse": float(best.fun),
        },
        years=np.arange(s.end + 1, s.end + 1 + horizon),
        transformed=transformed,
        levels=_back_transform(transformed, back_transform),
    )


# ---------------------------------------------------------------------------
# Theta
# ---------------------------------------------------------------------------


def _ses_level_and_sse(y: np.ndarray, alpha: float):
    level = y[0]
    sse = 0.0
    for t in range(1, len(y)):
        err = y[t] - level
        sse += err * err
        level = level + alpha * err
    return level, sse


def theta_forecast(
    s: AnnualSeries, horizon: int, back_transform: str = "none"
) -> ForecastResult:
    """Two-line Theta forecast combining a trend line and a smoothed line.

    The theta-0 line is the OLS linear trend in time, extended over the
    horizon. The theta-2 line (2y - trend) is forecast by simple
    exponential smoothing applied to its deviation from the trend,
    re-anchored to the extended trend, so an exactly linear series is
    continued exactly rather than at half slope. The two line forecasts are
    combined with equal weights; the smoothing parameter is chosen by SSE
    on [0.01, 0.99].

    Raises
    ------
    OptimFailed
        If the smoothing-parameter search returns a non-finite objective.
    """
    y = np.asarray(s.values, dtype=float)
    n = len(y)
    if n < 10:
        raise TooShort(f"theta needs >= 10 observations, have {n}")
    if horizon < 1:
        raise UnsupportedCase(f"horizon {horizon} must be >= 1")

    t_idx = np.arange(n, dtype=float)
    b, a = np.polyfit(t_idx, y, 1)
    trend = a + b * t_idx
    dev = 2.0 * (y - trend)

    res = optimize.minimize_scalar(
        lambda al: _ses_level_and_sse(dev, al)[1],
        bounds=(0.01, 0.99),
        method="bounded",
        options={"xatol": 1e-8},
    )
    if not math.isfinite(res.fun):
        raise OptimFailed("smoothing-parameter search diverged")
    alpha = float(res.x)
    ses_level, _ = _ses_level_and_sse(dev, alpha)

    future_t = np.arange(n, n + horizon, dtype=float)
    trend_future = a + b * future_t
    theta2_future = trend_future + ses_level
    transformed = 0.5 * trend_future + 0.5 * theta2_future
    return ForecastResult(
        model="theta",
        params={
            "trend_intercept": float(a),
            "trend_slope": float(b),
            "alpha": alpha,
            "ses_level": float(ses_level),
        },
        years=np.arange(s.end + 1, s.end + 1 + horizon),
        transformed=transformed,
        levels=_back_transform(transformed, back_transform),
    )


# ---------------------------------------------------------------------------
# Lagged features
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureMatrix:
    """A leakage-free supervised design of lagged values.

    Attributes
    ----------
    years : ndarray
        Target years, one per row.
    names : tuple
        Feature column names, ``"<series>_l<j>"`` for lags j = 1..L.
    X : ndarray
        Rows by features; entry (t, "<nm>_l<j>") is the value of nm at
        year t - j, so every feature uses only data at or before t-1.
    y : ndarray
        Target values at the row years.
    target : str
        Target series name.
    next_year : int
        The first year after the window; its lags are fully observed.
    next_row : ndarray
        Feature vector for ``next_year``.
    """

    years: np.ndarray
    names: tuple
    X: np.ndarray
    y: np.ndarray
    target: str
    next_year: int
    next_row: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.y)


def build_lagged_features(
    ds: Dataset, lags: int, target: str, features=None
) -> FeatureMatrix:
    """Build the lagged supervised design for one target series.

    Parameters
    ----------
    ds : Dataset
        Aligned series; every named feature series and the target must be
        present.
    lags : int
        Number of lags per series, 1..L.
    target : str
        Target series name; also used as a feature source.
    features : iterable of str, optional
        Source series for lagged columns; defaults to every series in the
        dataset (target included).

    Returns
    -------
    FeatureMatrix
        Rows for every year with all lags observed; rows containing any
        NaN feature or target are dropped.
    """
    if lags < 1:
        raise InvalidLag(f"lags={lags} must be >= 1")
    src = list(features) if features is not None else list(ds.names())
    years = np.asarray(ds.years, dtype=int)
    n = len(years)
    if n <= lags + 2:
        raise TooShort(f"{n} years cannot support {lags} lags")

    yv = np.asarray(ds.get(target).values, dtype=float)
    names = []
    cols = []
    next_feats = []
    for nm in src:
        v = np.asarray(ds.get(nm).values, dtype=float)
        for j in range(1, lags + 1):
            names.append(f"{nm}_l{j}")
            cols.append(v[lags - j : n - j])
            next_feats.append(v[n - j])
    X = np.column_stack(cols)
    y = yv[lags:]
    row_years = years[lags:]

    keep = ~(np.isnan(X).any(axis=1) | np.isnan(y))
    X, y, row_years = X[keep], y[keep], row_years[keep]
    if len(y) < 3:
        raise TooShort(f"only {len(y)} complete rows after dropping missing lags")
    return FeatureMatrix(
        years=row_years,
        names=tuple(names),
        X=X,
        y=y,
        target=target,
        next_year=int(years[-1]) + 1,
        next_row=np.asarray(next_feats, dtype=float),
    )


# ---------------------------------------------------------------------------
# Penalized linear models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PenalizedModel:
    """A fitted standardized penalized linear model.

    Coefficients live on the standardized feature scale; ``predict``
    standardizes incoming raw feature rows with the stored training means
    and stds.
    """

    kind: str
    lam: float
    mix: float
    names: tuple
    coef: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_stds: np.ndarray

    def predict(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        z = (rows - self.feature_means) / self.feature_stds
        return self.intercept + z @ self.coef


def _standardize_columns(X: np.ndarray):
    mu = X.mean(axis=0)
    sd = X.std(axis=0, ddof=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (X - mu) / sd, mu, sd


def _ridge_solve(Z: np.ndarray, yc: np.ndarray, lam: float) -> np.ndarray:
    n, k = Z.shape
    aug_X = np.vstack([Z, math.sqrt(lam * n) * np.eye(k)])
    aug_y = np.concatenate([yc, np.zeros(k)])
    beta, *_ = np.linalg.lstsq(aug_X, aug_y, rcond=None)
    return beta


def _coordinate_descent(
    Z: np.ndarray, yc: np.ndarray, lam: float, mix: float, tol: float, max_iter: int
) -> np.ndarray:
    """Elastic-net coordinate descent on (1/2n)RSS + lam*(mix*L1 + (1-mix)/2*L2)."""
    n, k = Z.shape
    beta = np.zeros(k)
    col_sq = (Z**2).sum(axis=0) / n
    resid = yc.copy()
    thresh = lam * mix
    denom_add = lam * (1.0 - mix)
    for it in range(max_iter):
        max_delta = 0.0
        for j in range(k):
            bj = beta[j]
            rho = (Z[:, j] @ resid) / n + col_sq[j] * bj
            bnew = math.copysign(max(abs(rho) - thresh, 0.0), rho) / (
                col_sq[j] + denom_add
            )
            if bnew != bj:
                resid += Z[:, j] * (bj - bnew)
                beta[j] = bnew
                max_delta = max(max_delta, abs(bnew - bj))
        if max_delta < tol:
            return _polish_active_set(Z, yc, lam, mix, beta)
    raise NoConvergence(f"coordinate descent hit {max_iter} iterations")


def _polish_active_set(Z, yc, lam, mix, beta):
    """Exact solve on the converged active set, kept only if KKT-verified.

    With the active set and signs fixed, the elastic-net optimum solves a
    linear system; accepting it only when no sign flips and the inactive
    gradients stay inside the L1 threshold makes the result exact instead
    of sweep-tolerance accurate. Falls back to the descent iterate.
    """
    n = len(yc)
    active = np.flatnonzero(beta != 0.0)
    if active.size == 0:
        return beta
    signs = np.sign(beta[active])
    Za = Z[:, active]
    gram = Za.T @ Za / n + lam * (1.0 - mix) * np.eye(active.size)
    rhs = Za.T @ yc / n - lam * mix * signs
    try:
        sol = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return beta
    if np.any(np.sign(sol) * signs < 0.0):
        return beta
    cand = np.zeros_like(beta)
    cand[active] = sol
    grad = Z.T @ (yc - Z @ cand) / n
    slack = 1e-9 * max(1.0, float(np.max(np.abs(grad))))
    inactive_bad = np.abs(grad) > lam * mix + slack
    inactive_bad[active] = False
    if np.any(inactive_bad):
        return beta
    return cand


def _expanding_folds(n_rows: int, min_train: int):
    """(train_end, test_index) pairs; the test row is never in its train set."""
    return [(t, t) for t in range(min_train, n_rows)]


def _fit_penalized_beta(Z, yc, kind, lam, mix, tol, max_iter):
    if kind == "ridge":
        return _ridge_solve(Z, yc, lam)
    cd_mix = 1.0 if kind == "lasso" else mix
    return _coordinate_descent(Z, yc, lam, cd_mix, tol, max_iter)


def penalized_linear_fit(
    F: FeatureMatrix,
    kind: str = "ridge",
    lam: float | None = None,
    mix: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 200_000,
    back_transform: str = "none",
):
    """Fit a penalized linear model on standardized features.

    Ridge solves the augmented normal equations in closed form; lasso and
    elastic net run coordinate descent to a coefficient-change tolerance.
    The intercept is never penalized (features are standardized and the
    target centered). With ``lam=None`` the penalty is chosen from a fixed
    11-point log grid spanning 1e-3..1e2 by leave-future-out validation on
    an expanding window, ties toward the larger penalty.

    Parameters
    ----------
    F : FeatureMatrix
    kind : str
        ``"ridge"``, ``"lasso"`` or ``"elastic_net"``.
    lam : float, optional
        Penalty weight, >= 0. ``None`` triggers the validation grid.
    mix : float
        Elastic-net L1 share in [0, 1]; ignored for ridge and lasso.
    tol, max_iter :
        Coordinate-descent stopping controls.
    back_transform : str
        ``"none"`` or ``"exp"`` for the one-step forecast levels.

    Returns
    -------
    (PenalizedModel, ForecastResult)
        The model plus a one-step-ahead forecast for ``F.next_year``.

    Raises
    ------
    NoConvergence
        If coordinate descent exhausts ``max_iter``.
    """
    if kind not in ("ridge", "lasso", "elastic_net"):
        raise UnsupportedCase(f"unknown penalty kind {kind!r}")
    if lam is not None and lam < 0:
        raise UnsupportedCase(f"penalty {lam} must be >= 0")
    if not (0.0 <= mix <= 1.0):
        raise UnsupportedCase(f"mix {mix} must lie in [0, 1]")

    Z, mu, sd = _standardize_columns(F.X)
    ybar = float(F.y.mean())
    yc = F.y - ybar

    chosen = lam
    if chosen is None:
        min_train = max(len(F.names) + 2, F.n_rows // 2, 5)
        folds = _expanding_folds(F.n_rows, min_train)
        if not folds:
            raise TooShort(
                f"{F.n_rows} rows leave no expanding-window validation folds"
            )
        best_err, chosen = math.inf, LAMBDA_GRID[-1]
        for cand in reversed(LAMBDA_GRID):
            sq = 0.0
            for train_end, test_i in folds:
                Zt, mut, sdt = _standardize_columns(F.X[:train_end])
                yt = F.y[:train_end]
                beta_t = _fit_penalized_beta(
                    Zt, yt - yt.mean(), kind, cand, mix, tol, max_iter
                )
                zrow = (F.X[test_i] - mut) / sdt
                sq += float((yt.mean() + zrow @ beta_t - F.y[test_i]) ** 2)
            err = sq / len(folds)
            if err < best_err - 1e-12:
                best_err, chosen = err, cand
        chosen = float(chosen)

    beta = _fit_penalized_beta(Z, yc, kind, chosen, mix, tol, max_iter)
    model = PenalizedModel(
        kind=kind,
        lam=float(chosen),
        mix=1.0 if kind == "lasso" else (0.0 if kind == "ridge" else mix),
        names=F.names,
        coef=beta,
        intercept=ybar,
        feature_means=mu,
        feature_stds=sd,
    )
    point = float(model.predict(F.next_row)[0])
    transformed = np.asarray([point])
    fc = ForecastResult(
        model=kind,
        params={"lam": model.lam, "mix": model.mix},
        years=np.asarray([F.next_year]),
        transformed=transformed,
        levels=_back_transform(transformed, back_transform),
    )
    return model, fc


# ---------------------------------------------------------------------------
# Gradient-boosted trees
# ---------------------------------------------------------------------------


def _best_split(X: np.ndarray, r: np.ndarray):
    """Exhaustive least-squares split search; None when nothing improves."""
    n, k = X.shape
    mean_sq = n * float(r.mean()) ** 2
    best = None
    for j in range(k):
        order = np.argsort(X[:, j], kind="stable")
        xs, rs = X[order, j], r[order]
        csum = np.cumsum(rs)
        total = csum[-1]
        for i in range(n - 1):
            if xs[i + 1] <= xs[i]:
                continue
            nl = i + 1
            nr = n - nl
            left_mean = csum[i] / nl
            right_mean = (total - csum[i]) / nr
            gain = nl * left_mean**2 + nr * right_mean**2 - mean_sq
            if gain > 1e-12 and (best is None or gain > best[0]):
                best = (gain, j, 0.5 * (xs[i] + xs[i + 1]))
    if best is None:
        return None
    return best[1], best[2]


def _grow_tree(X: np.ndarray, r: np.ndarray, depth: int):
    """A nested-dict regression tree grown by exact greedy splits."""
    if depth == 0 or len(r) < 2 or float(np.ptp(r)) < 1e-15:
        return {"value": float(r.mean())}
    found = _best_split(X, r)
    if found is None:
        return {"value": float(r.mean())}
    j, thresh = found
    mask = X[:, j] <= thresh
    return {
        "feature": int(j),
        "threshold": float(thresh),
        "left": _grow_tree(X[mask], r[mask], depth - 1),
        "right": _grow_tree(X[~mask], r[~mask], depth - 1),
    }


def _tree_predict(tree: dict, rows: np.ndarray) -> np.ndarray:
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        node = tree
        while "value" not in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        out[i] = node["value"]
    return out


@dataclass(frozen=True)
class GbmModel:
    """Least-squares gradient-boosted regression trees."""

    names: tuple
    initial: float
    trees: tuple
    learning_rate: float
    train_losses: tuple

    def predict(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        pred = np.full(len(rows), self.initial)
        for tree in self.trees:
            pred += self.learning_rate * _tree_predict(tree, rows)
        return pred


def gbm_fit(
    F: FeatureMatrix,
    trees: int = 200,
    depth: int = 2,
    learning_rate: float = 0.05,
    back_transform: str = "none",
):
    """Boost depth-limited regression trees on the squared-error gradient.

    Exact greedy splits over every feature and threshold, no row
    subsampling, so the fit is fully deterministic. A constant target (or
    a boosting round with nothing left to split) degrades to the mean-only
    model rather than raising.

    Parameters
    ----------
    F : FeatureMatrix
    trees : int
        Boosting rounds, >= 1.
    depth : int
        Tree depth, 1..3.
    learning_rate : float
        Shrinkage on each tree's contribution.
    back_transform : str
        ``"none"`` or ``"exp"`` for the one-step forecast levels.

    Returns
    -------
    (GbmModel, ForecastResult)
        The model plus a one-step-ahead forecast for ``F.next_year``.
    """
    if trees < 1:
        raise UnsupportedCase(f"need >= 1 boosting round, got {trees}")
    if not (1 <= depth <= 3):
        raise UnsupportedCase(f"depth {depth} outside 1..3")
    if not (0.0 < learning_rate <= 1.0):
        raise UnsupportedCase(f"learning rate {learning_rate} outside (0, 1]")

    initial = float(F.y.mean())
    pred = np.full(F.n_rows, initial)
    grown = []
    losses = []
    for _ in range(trees):
        resid = F.y - pred
        if float(np.ptp(resid)) < 1e-15:
            break
        tree = _grow_tree(F.X, resid, depth)
        if "value" in tree and abs(tree["value"]) < 1e-15:
            break
        grown.append(tree)
        pred += learning_rate * _tree_predict(tree, F.X)
        losses.append(float(np.mean((F.y - pred) ** 2)))

    model = GbmModel(
        names=F.names,
        initial=initial,
        trees=tuple(grown),
        learning_rate=learning_rate,
        train_losses=tuple(losses),
    )
    point = float(model.predict(F.next_row)[0])
    transformed = np.asarray([point])
    fc = ForecastResult(
        model="gbm",
        params={"trees": len(grown), "depth": depth, "learning_rate": learning_rate},
        years=np.asarray([F.next_year]),
        transformed=transformed,
        levels=_back_transform(transformed, back_transform),
    )
    return model, fc


# ---------------------------------------------------------------------------
# Holdout evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoldoutReport:
    """Holdout metrics per model with the best model flagged per metric.

    ``metrics`` maps model name -> {"mape": float, "rmse": float}; MAPE is
    in percent on back-transformed levels, RMSE on the modelling scale.
    """

    metrics: dict
    best_mape: str
    best_rmse: str
    holdout_years: tuple

    def rows(self) -> list:
        return [
            {
                "model": nm,
                "mape": m["mape"],
                "rmse": m["rmse"],
                "best_mape": nm == self.best_mape,
                "best_rmse": nm == self.best_rmse,
            }
            for nm, m in self.metrics.items()
        ]


def holdout_eval(
    forecasters: dict,
    s: AnnualSeries,
    holdout: int = 5,
    back_transform: str = "exp",
) -> HoldoutReport:
    """Score forecasters on the last ``holdout`` years, refit on the rest.

    Each forecaster is a callable ``(train: AnnualSeries, horizon: int) ->
    ForecastResult`` and sees only the pre-holdout series. MAPE (percent)
    is computed on back-transformed levels, RMSE on the modelling scale.

    Parameters
    ----------
    forecasters : dict
        Model name -> forecaster callable.
    s : AnnualSeries
        The full (transformed) series including the holdout years.
    holdout : int
        Number of trailing years to hold out; must leave >= 10 training
        years.
    back_transform : str
        ``"exp"`` when ``s`` is a ln series, else ``"none"``.

    Returns
    -------
    HoldoutReport
    """
    if not forecasters:
        raise UnsupportedCase("no forecasters to evaluate")
    if holdout < 1:
        raise UnsupportedCase(f"holdout {holdout} must be >= 1")
    n = len(s)
    if n - holdout < 10:
        raise TooShort(
            f"{n} observations leave {n - holdout} training years; need >= 10"
        )
    train = s.window(s.start, s.end - holdout)
    actual_t = np.asarray(s.values[n - holdout :], dtype=float)
    actual_levels = _back_transform(actual_t, back_transform)
    hold_years = tuple(int(yr) for yr in s.years[n - holdout :])

    metrics = {}
    for nm, fn in forecasters.items():
        fc = fn(train, holdout)
        if len(fc.transformed) != holdout or int(fc.years[0]) != hold_years[0]:
            raise UnsupportedCase(
                f"forecaster {nm!r} returned years {fc.years}; expected {hold_years}"
            )
        levels = _back_transform(np.asarray(fc.transformed, dtype=float), back_transform)
        mape = float(np.mean(np.abs(levels - actual_levels) / np.abs(actual_levels))) * 100.0
        rmse = float(np.sqrt(np.mean((np.asarray(fc.transformed) - actual_t) ** 2)))
        metrics[nm] = {"mape": mape, "rmse": rmse}

    best_mape = min(metrics, key=lambda k: metrics[k]["mape"])
    best_rmse = min(metrics, key=lambda k: metrics[k]["rmse"])
    return HoldoutReport(
        metrics=metrics,
        best_mape=best_mape,
        best_rmse=best_rmse,
        holdout_years=hold_years,
    )
