"""Embedded critical-value tables and p-value response surfaces.

Everything inference-related is computed from published literature constants
kept in this module, so the package carries no runtime dependency on an
external statistics library:

* MacKinnon (1994) response-surface coefficients for unit-root and
  cointegration tau statistics (p-values), and MacKinnon (2010) critical
  value regressions in 1/T.
* Kwiatkowski, Phillips, Schmidt and Shin (1992) LM critical values.
* Zivot and Andrews (1992) minimum-tau critical values, models A/B/C.
* Pesaran, Shin and Smith (2001) bounds-test table for the unrestricted
  intercept, no trend case (their case III), k = 0..10.
* Brown, Durbin and Evans (1975) CUSUM band slopes, and Monte Carlo
  calibrated CUSUM-of-squares band half-widths (see tools/ for the
  calibration script; the published small-sample tables are reproduced by
  simulation rather than transcription).

The response-surface evaluation follows MacKinnon (1994): a cubic (small-p
branch) or quartic (large-p branch) polynomial in tau is mapped through the
standard normal CDF; outside the tabulated support the p-value saturates
at 0 or 1.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .errors import UnsupportedCase

# ---------------------------------------------------------------------------
# MacKinnon (1994) tau response surfaces. Index [N-1] selects the number of
# I(1) series under the null (N=1 for plain unit-root tests, N=k+1 for
# no-cointegration tests on residuals from k regressors). "n" = no
# deterministic terms, "c" = constant, "ct" = constant and trend.
# ---------------------------------------------------------------------------

_TAU_STAR = {
    "n": [-1.04, -1.53, -2.68, -3.09, -3.07, -3.77],
    "c": [-1.61, -2.62, -3.13, -3.47, -3.78, -3.93],
    "ct": [-2.89, -3.19, -3.50, -3.65, -3.80, -4.36],
}
_TAU_MIN = {
    "n": [-19.04, -19.62, -21.21, -23.25, -21.63, -25.74],
    "c": [-18.83, -18.86, -23.48, -28.07, -25.96, -23.27],
    "ct": [-16.18, -21.15, -25.37, -26.63, -26.53, -26.18],
}
_TAU_MAX = {
    "n": [np.inf, 1.51, 0.86, 0.88, 1.05, 1.24],
    "c": [2.74, 0.92, 0.55, 0.61, 0.79, 1.00],
    "ct": [0.70, 0.63, 0.71, 0.93, 1.19, 1.42],
}

_SMALL_SCALE = np.array([1.0, 1.0, 1e-2])
_TAU_SMALLP = {
    "n": np.array(
        [
            [0.6344, 1.2378, 3.2496],
            [1.9129, 1.3857, 3.5322],
            [2.7648, 1.4502, 3.4186],
            [3.4336, 1.4835, 3.1900],
            [4.0999, 1.5533, 3.5900],
            [4.5388, 1.5344, 2.9807],
        ]
    )
    * _SMALL_SCALE,
    "c": np.array(
        [
            [2.1659, 1.4412, 3.8269],
            [2.9200, 1.5012, 3.9796],
            [3.4699, 1.4856, 3.1640],
            [3.9673, 1.4777, 2.6315],
            [4.5509, 1.5338, 2.9545],
            [5.1399, 1.6036, 3.4445],
        ]
    )
    * _SMALL_SCALE,
    "ct": np.array(
        [
            [3.2512, 1.6047, 4.9588],
            [3.6646, 1.5419, 3.6448],
            [4.0983, 1.5173, 2.9898],
            [4.5844, 1.5338, 2.8796],
            [5.0722, 1.5634, 2.9472],
            [5.5300, 1.5914, 3.0392],
        ]
    )
    * _SMALL_SCALE,
}

_LARGE_SCALE = np.array([1.0, 1e-1, 1e-1, 1e-2])
_TAU_LARGEP = {
    "n": np.array(
        [
            [0.4797, 9.3557, -0.6999, 3.3066],
            [1.5578, 8.5580, -2.0830, -3.3549],
            [2.2268, 6.8093, -3.2362, -5.4448],
            [2.7654, 6.4502, -3.0811, -4.4946],
            [3.2684, 6.8051, -2.6778, -3.4972],
            [3.7268, 7.1670, -2.3648, -2.8288],
        ]
    )
    * _LARGE_SCALE,
    "c": np.array(
        [
            [1.7339, 9.3202, -1.2745, -1.0368],
            [2.1945, 6.4695, -2.9198, -4.2377],
            [2.5893, 4.5168, -3.6529, -5.0074],
            [3.0387, 4.5452, -3.3666, -4.1921],
            [3.5049, 5.2098, -2.9158, -3.3468],
            [3.9489, 5.8933, -2.5359, -2.7210],
        ]
    )
    * _LARGE_SCALE,
    "ct": np.array(
        [
            [2.5261, 6.1654, -3.7956, -6.0285],
            [2.8500, 5.2720, -3.6622, -5.1695],
            [3.2210, 5.2550, -3.2685, -4.1501],
            [3.6520, 5.9758, -2.7483, -3.2081],
            [4.0712, 6.6428, -2.3464, -2.5460],
            [4.4735, 7.1757, -2.0681, -2.1196],
        ]
    )
    * _LARGE_SCALE,
}


def mackinnon_pvalue(tau: float, regression: str = "c", n_series: int = 1) -> float:
    """Approximate asymptotic p-value for a tau statistic.

    Parameters
    ----------
    tau : float
        The unit-root t statistic.
    regression : {"n", "c", "ct"}
        Deterministic terms in the testing regression.
    n_series : int
        Number of I(1) series under the null; 1 for a plain unit-root test,
        k+1 when testing residuals of a cointegrating regression on k
        regressors. Supported up to 6.
    """
    if regression not in _TAU_STAR:
        raise UnsupportedCase(f"regression {regression!r} not in ('n','c','ct')")
    i = n_series - 1
    if not 0 <= i < 6:
        raise UnsupportedCase(f"n_series={n_series} outside 1..6")
    if tau > _TAU_MAX[regression][i]:
        return 1.0
    if tau < _TAU_MIN[regression][i]:
        return 0.0
    if tau <= _TAU_STAR[regression][i]:
        coef = _TAU_SMALLP[regression][i]
    else:
        coef = _TAU_LARGEP[regression][i]
    return float(norm.cdf(np.polyval(coef[::-1], tau)))


# ---------------------------------------------------------------------------
# MacKinnon (2010) finite-sample critical values: crit = b0 + b1/T + b2/T^2
# + b3/T^3. Rows are (1%, 5%, 10%). "c" is tabulated for N = 1..6 so
# Engle-Granger residual tests can be adjusted for up to 5 regressors.
# ---------------------------------------------------------------------------

_CRIT_2010 = {
    "n": {
        1: np.array(
            [
                [-2.56574, -2.2358, -3.627, 0.0],
                [-1.94100, -0.2686, -3.365, 31.223],
                [-1.61682, 0.2656, -2.714, 25.364],
            ]
        )
    },
    "c": {
        1: np.array(
            [
                [-3.43035, -6.5393, -16.786, -79.433],
                [-2.86154, -2.8903, -4.234, -40.040],
                [-2.56677, -1.5384, -2.809, 0.0],
            ]
        ),
        2: np.array(
            [
                [-3.89644, -10.9519, -33.527, 0.0],
                [-3.33613, -6.1101, -6.823, 0.0],
                [-3.04445, -4.2412, -2.720, 0.0],
            ]
        ),
        3: np.array(
            [
                [-4.29374, -14.4354, -33.195, 47.433],
                [-3.74066, -8.5632, -10.852, 27.982],
                [-3.45218, -6.2143, -3.718, 0.0],
            ]
        ),
        4: np.array(
            [
                [-4.64332, -18.1031, -37.972, 0.0],
                [-4.09600, -11.2349, -11.175, 0.0],
                [-3.81020, -8.3931, -4.137, 0.0],
            ]
        ),
        5: np.array(
            [
                [-4.95756, -21.8883, -45.142, 0.0],
                [-4.41519, -14.0405, -12.575, 0.0],
                [-4.13157, -10.7417, -3.784, 0.0],
            ]
        ),
        6: np.array(
            [
                [-5.24568, -25.6688, -57.737, 88.639],
                [-4.70693, -16.9178, -17.492, 60.007],
                [-4.42501, -13.1875, -5.104, 27.877],
            ]
        ),
    },
    "ct": {
        1: np.array(
            [
                [-3.95877, -9.0531, -28.428, -134.155],
                [-3.41049, -4.3904, -9.036, -45.374],
                [-3.12705, -2.5856, -3.925, -22.380],
            ]
        )
    },
}

_LEVELS = (0.01, 0.05, 0.10)


def mackinnon_crit(regression: str = "c", n_series: int = 1, nobs: float = np.inf) -> dict:
    """Critical values at 1%/5%/10% for a tau statistic, finite-sample adjusted."""
    try:
        table = _CRIT_2010[regression][n_series]
    except KeyError:
        raise UnsupportedCase(
            f"no critical values for regression={regression!r}, n_series={n_series}"
        ) from None
    powers = np.array([1.0, 1.0 / nobs, 1.0 / nobs**2, 1.0 / nobs**3])
    vals = table @ powers
    return dict(zip(_LEVELS, (float(v) for v in vals)))


def mackinnon_pvalue_finite(
    tau: float, regression: str = "c", n_series: int = 1, nobs: float = np.inf
) -> float:
    """Response-surface p-value recentered for the finite sample.

    The 1994 surface is asymptotic; in samples this small the tau
    distribution sits to the left of its limit and raw surface p-values
    over-reject. The statistic is shifted by the gap between the
    finite-sample and asymptotic critical values (interpolated across the
    1%/5%/10% anchors, held flat beyond them) before the surface is applied,
    so that p = level holds exactly at each finite-sample critical value.
    """
    if not np.isfinite(nobs):
        return mackinnon_pvalue(tau, regression, n_series)
    fs = mackinnon_crit(regression, n_series, nobs)
    asy = mackinnon_crit(regression, n_series, np.inf)
    xs = np.array([fs[0.01], fs[0.05], fs[0.10]])
    ds = np.array([asy[lv] - fs[lv] for lv in (0.01, 0.05, 0.10)])
    delta = float(np.interp(tau, xs, ds))
    return mackinnon_pvalue(tau + delta, regression, n_series)


# ---------------------------------------------------------------------------
# KPSS critical values for the LM statistic: "c" = level stationarity,
# "ct" = trend stationarity. Columns are the 10%, 5%, 2.5%, 1% points.
# ---------------------------------------------------------------------------

_KPSS_PCTS = np.array([0.10, 0.05, 0.025, 0.01])
_KPSS_CRIT = {
    "c": np.array([0.347, 0.463, 0.574, 0.739]),
    "ct": np.array([0.119, 0.146, 0.176, 0.216]),
}


def kpss_crit(regression: str = "c") -> dict:
    c = _KPSS_CRIT[regression]
    return {0.01: float(c[3]), 0.05: float(c[1]), 0.10: float(c[0])}


def kpss_pvalue(stat: float, regression: str = "c") -> tuple:
    """Interpolated KPSS p-value, clamped to [0.01, 0.10].

    Returns (p, bound) where bound is "le" when the statistic exceeds the 1%
    point (true p at most 0.01), "ge" when it is below the 10% point, and
    None for an interior interpolated value.
    """
    crit = _KPSS_CRIT[regression]
    if stat >= crit[-1]:
        return 0.01, "le"
    if stat <= crit[0]:
        return 0.10, "ge"
    p = float(np.interp(stat, crit, _KPSS_PCTS))
    return p, None


# ---------------------------------------------------------------------------
# Zivot-Andrews minimum-tau critical values. Model "intercept" allows a mean
# shift, "trend" a slope shift, "both" allows both.
# ---------------------------------------------------------------------------

_ZA_PCTS = np.array([0.01, 0.05, 0.10])
_ZA_CRIT = {
    "intercept": np.array([-5.34, -4.80, -4.58]),
    "trend": np.array([-4.93, -4.42, -4.11]),
    "both": np.array([-5.57, -5.08, -4.82]),
}


def za_crit(model: str = "intercept") -> dict:
    try:
        c = _ZA_CRIT[model]
    except KeyError:
        raise UnsupportedCase(f"unknown break model {model!r}") from None
    return dict(zip(_LEVELS, (float(v) for v in c)))


def za_pvalue(stat: float, model: str = "intercept") -> tuple:
    """Interpolated minimum-tau p-value, clamped to [0.01, 0.10]."""
    crit = _ZA_CRIT[model]  # descending significance: 1%, 5%, 10%
    if stat <= crit[0]:
        return 0.01, "le"
    if stat >= crit[2]:
        return 0.10, "ge"
    p = float(np.interp(stat, crit, _ZA_PCTS))
    return p, None


# ---------------------------------------------------------------------------
# Pesaran, Shin and Smith (2001) bounds-test critical values, case III
# (unrestricted intercept, no trend). Rows k = 0..10; per significance level
# the (I0, I1) pair bounds the F statistic under purely-I(0) and purely-I(1)
# regressors.
# ---------------------------------------------------------------------------

_PSS_CASE3 = {
    # k: {0.10: (I0, I1), 0.05: ..., 0.025: ..., 0.01: ...}
    0: {0.10: (6.58, 6.58), 0.05: (8.21, 8.21), 0.025: (9.80, 9.80), 0.01: (11.79, 11.79)},
    1: {0.10: (4.04, 4.78), 0.05: (4.94, 5.73), 0.025: (5.77, 6.68), 0.01: (6.84, 7.84)},
    2: {0.10: (3.17, 4.14), 0.05: (3.79, 4.85), 0.025: (4.41, 5.52), 0.01: (5.15, 6.36)},
    3: {0.10: (2.72, 3.77), 0.05: (3.23, 4.35), 0.025: (3.69, 4.89), 0.01: (4.29, 5.61)},
    4: {0.10: (2.45, 3.52), 0.05: (2.86, 4.01), 0.025: (3.25, 4.49), 0.01: (3.74, 5.06)},
    5: {0.10: (2.26, 3.35), 0.05: (2.62, 3.79), 0.025: (2.96, 4.18), 0.01: (3.41, 4.68)},
    6: {0.10: (2.12, 3.23), 0.05: (2.45, 3.61), 0.025: (2.75, 3.99), 0.01: (3.15, 4.43)},
    7: {0.10: (2.03, 3.13), 0.05: (2.32, 3.50), 0.025: (2.60, 3.84), 0.01: (2.96, 4.26)},
    8: {0.10: (1.95, 3.06), 0.05: (2.22, 3.39), 0.025: (2.48, 3.70), 0.01: (2.79, 4.10)},
    9: {0.10: (1.88, 2.99), 0.05: (2.14, 3.30), 0.025: (2.37, 3.60), 0.01: (2.65, 3.97)},
    10: {0.10: (1.83, 2.94), 0.05: (2.06, 3.24), 0.025: (2.28, 3.50), 0.01: (2.54, 3.86)},
}


def pesaran_bounds(k: int, case: int = 3) -> dict:
    """Bounds-test critical value pairs {level: (I0, I1)} for k regressors."""
    if case != 3:
        raise UnsupportedCase("only the unrestricted-intercept no-trend case (3) is supported")
    try:
        return {lv: tuple(pair) for lv, pair in _PSS_CASE3[k].items()}
    except KeyError:
        raise UnsupportedCase(f"k={k} outside the tabulated range 0..10") from None


# ---------------------------------------------------------------------------
# CUSUM band slope multipliers (Brown, Durbin, Evans 1975): the significance
# boundary is +/- a*sqrt(n-k) at the first recursive point widening to
# +/- 3a*sqrt(n-k) at the last.
# ---------------------------------------------------------------------------

_CUSUM_A = {0.01: 1.143, 0.05: 0.948, 0.10: 0.850}


def cusum_band_scale(level: float = 0.05) -> float:
    try:
        return _CUSUM_A[level]
    except KeyError:
        raise UnsupportedCase(f"no CUSUM band constant for level {level}") from None


# ---------------------------------------------------------------------------
# CUSUM-of-squares band half-widths c0(m) at 5%: the statistic path
# s_t = cumsum(w^2)/sum(w^2) over m recursive residuals stays inside
# (t/m) +/- c0 with probability 95% under stability. Values are Monte Carlo
# calibrated (500k paths per m, tools/calibrate_cusumsq.py) because the
# classical tables are printed for half-integer arguments and are awkward to
# transcribe exactly; the calibration reproduces them to ~3 decimals.
# Intermediate m uses linear interpolation in 1/m.
# ---------------------------------------------------------------------------

_CUSUMSQ_M = np.array([5, 8, 10, 12, 15, 18, 20, 25, 30, 40, 50, 60, 80, 100])
_CUSUMSQ_C0_05 = None  # filled below, generated by tools/calibrate_cusumsq.py

# start calibrated-values block (do not edit by hand)
_CUSUMSQ_C0_05 = np.array(
    [
        0.57026,
        0.50950,
        0.47392,
        0.44475,
        0.40981,
        0.38219,
        0.36647,
        0.33467,
        0.31050,
        0.27395,
        0.24802,
        0.22840,
        0.20052,
        0.18092,
    ]
)
# end calibrated-values block


def cusumsq_band_halfwidth(m: int, level: float = 0.05) -> float:
    """5% crossing band half-width for a CUSUM-of-squares path of length m."""
    if level != 0.05:
        raise UnsupportedCase("CUSUM-of-squares bands are calibrated at the 5% level only")
    if m < int(_CUSUMSQ_M[0]):
        raise UnsupportedCase(f"too few recursive residuals (m={m} < {_CUSUMSQ_M[0]})")
    if m >= int(_CUSUMSQ_M[-1]):
        # c0 ~ a/sqrt(m) asymptotically; extend with that shape anchored at
        # the last calibrated point
        return float(_CUSUMSQ_C0_05[-1] * np.sqrt(_CUSUMSQ_M[-1] / m))
    x = 1.0 / np.asarray(_CUSUMSQ_M, dtype=float)
    return float(np.interp(1.0 / m, x[::-1], _CUSUMSQ_C0_05[::-1]))
