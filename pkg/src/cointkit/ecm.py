"""Two-step error-correction estimation and scenario-based ECM forecasting.

Step one fits the long-run (cointegrating) regression elsewhere; this module
turns its residuals into an error-correction term, fits the short-run
equation in first differences, converts the adjustment coefficient into a
half-life, and iterates the fitted system forward under named exogenous
scenarios.

The short-run design is: constant, ECT lagged once, the dependent's own
lagged difference, the contemporaneous difference of every long-run
regressor, then any impulse dummies, with an HC1 covariance.

Scenario forecasting is dynamic: the lagged-difference feedback uses the
model's own previous forecast, the ECT is recomputed each year from the
long-run equation at the projected exogenous levels, and dummies are zero
beyond the sample. Levels come from plain exponentiation by default; a
Duan smearing factor (mean of exp(short-run residuals)) is available as an
option, as is no back-transform for models fit in levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    MissingRule,
    NonConverging,
    OutOfWindow,
    SampleTooSmall,
    SeriesError,
    TooShort,
    UnknownName,
    UnsupportedCase,
)
from .regress import CONST, RegressionResult, ols_fit, robust_covariance
from .results import ForecastResult
from .series import AnnualSeries, Dataset, series_from_values

SCENARIO_NAMES = ("baseline", "high_demand", "low_demand", "custom")

#: Default absolute level add-ons behind the narrative scenario qualifiers:
#: "moderately lower oil prices" = -10% on the level of a ln series, and
#: "tighter domestic monetary conditions" = +0.5 index units.
OIL_SHIFT_HIGH = math.log(0.9)
MCI_SHIFT_LOW = 0.5


@dataclass(frozen=True)
class PathRule:
    """How one exogenous variable evolves over a scenario horizon.

    Attributes
    ----------
    kind : str
        ``"drift"`` continues the historical mean annual change;
        ``"shock"`` adds a level shift on top of the drift path, held for
        the whole horizon; ``"fixed"`` echoes ``values`` verbatim.
    sigma : float
        Shock size in multiples of the variable's historical standard
        deviation (shock rules only).
    shift : float
        Extra absolute level shift added alongside ``sigma`` (shock rules
        only); used for the oil and monetary-conditions adjustments.
    values : tuple
        The explicit path, one value per horizon year (fixed rules only).
    """

    kind: str
    sigma: float = 0.0
    shift: float = 0.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("drift", "shock", "fixed"):
            raise UnsupportedCase(f"unknown path rule kind {self.kind!r}")


def drift_rule() -> PathRule:
    """Continue the variable's historical mean annual change."""
    return PathRule("drift")


def shock_rule(sigma: float, shift: float = 0.0) -> PathRule:
    """Drift plus a held level shift of sigma historical stds plus shift."""
    return PathRule("shock", sigma=float(sigma), shift=float(shift))


def fixed_rule(values) -> PathRule:
    """Echo an explicit path verbatim, one value per horizon year."""
    return PathRule("fixed", values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class ScenarioSpec:
    """A named scenario: horizon plus one path rule per exogenous variable.

    Attributes
    ----------
    name : str
        One of ``"baseline"``, ``"high_demand"``, ``"low_demand"``,
        ``"custom"``.
    horizon : tuple
        ``(first_year, last_year)`` inclusive; the first year must be the
        year after the sample ends.
    rules : dict
        Variable name -> :class:`PathRule`.
    """

    name: str
    horizon: tuple
    rules: dict

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise UnsupportedCase(
                f"scenario name {self.name!r} not in {SCENARIO_NAMES}"
            )
        first, last = (int(v) for v in self.horizon)
        if last < first:
            raise OutOfWindow(f"horizon {self.horizon} runs backwards")
        object.__setattr__(self, "horizon", (first, last))

    @property
    def n_years(self) -> int:
        return self.horizon[1] - self.horizon[0] + 1


@dataclass(frozen=True)
class EcmResult:
    """The fitted short-run equation with its adjustment summary.

    Attributes
    ----------
    regression : RegressionResult
        Short-run OLS fit (HC1 covariance) of the dependent's difference.
    ect_coefficient : float
        Coefficient on the lagged error-correction term.
    half_life : float
        Years to absorb half a disequilibrium; finite exactly when the
        adjustment coefficient lies in (-2, 0), else ``inf``.
    dependent : str
        Name of the (transformed) level series the differences came from.
    ect_name, dy_lag_name : str
        Design-column names of the lagged ECT and lagged own difference.
    dx_names : tuple
        The long-run regressor names whose contemporaneous differences
        enter the design (design columns are ``"d_" + name``).
    dummy_names : tuple
        Design-column names of the impulse dummies, in design order.
    """

    regression: RegressionResult
    ect_coefficient: float
    half_life: float
    dependent: str
    ect_name: str
    dy_lag_name: str
    dx_names: tuple
    dummy_names: tuple

    def __post_init__(self):
        finite = math.isfinite(self.half_life)
        inside = -2.0 < self.ect_coefficient < 0.0
        if finite != inside:
            raise NonConverging(
                f"half_life {self.half_life} inconsistent with "
                f"adjustment {self.ect_coefficient}"
            )

    @property
    def roster(self) -> dict:
        """Design-column names grouped by role."""
        return {
            "ect": self.ect_name,
            "dy_lag": self.dy_lag_name,
            "dx": tuple(f"d_{nm}" for nm in self.dx_names),
            "dummies": self.dummy_names,
        }


def build_ect(longrun: RegressionResult) -> AnnualSeries:
    """Turn long-run residuals into the error-correction term series.

    ECT_t is the long-run residual at year t; consumers lag it by one year
    when building the short-run design. With an intercept in the long-run
    fit the term is mean zero by construction.

    Parameters
    ----------
    longrun : RegressionResult
        The cointegrating regression, fitted on the full window with year
        labels attached.

    Returns
    -------
    AnnualSeries
        Residuals labelled by the long-run sample years (0..n-1 when the
        fit was given no calendar labels), named ``"ect"``.
    """
    return longrun.residual_series("ect")


def half_life(psi: float) -> float:
    """Years until half a disequilibrium is absorbed, ln(0.5)/ln(1+psi).

    Parameters
    ----------
    psi : float
        Adjustment coefficient from the short-run equation; must lie in
        (-2, 0) for the process to converge.

    Returns
    -------
    float
        The half-life in years. ``psi = -1`` corrects fully within the
        year and returns 0 by convention. For psi in (-2, -1) adjustment
        overshoots and oscillates; the magnitude-decay half-life
        ln(0.5)/ln|1+psi| is returned.

    Raises
    ------
    NonConverging
        If psi is outside (-2, 0).
    """
    psi = float(psi)
    if not (-2.0 < psi < 0.0):
        raise NonConverging(
            f"adjustment {psi} does not converge; need a value in (-2, 0)"
        )
    if psi == -1.0:
        return 0.0
    return math.log(0.5) / math.log(abs(1.0 + psi))


def _half_life_or_inf(psi: float) -> float:
    return half_life(psi) if -2.0 < psi < 0.0 else math.inf


def _aligned_values(ds: Dataset, name: str, years: np.ndarray) -> np.ndarray:
    s = ds.get(name)
    if not np.array_equal(s.years, years):
        raise SeriesError(
            f"{name}: span {s.start}-{s.end} does not match the dependent's window"
        )
    return np.asarray(s.values, dtype=float)


def ecm_fit(
    ds: Dataset,
    longrun: RegressionResult,
    dependent: str,
    dummies: dict | None = None,
) -> EcmResult:
    """Fit the short-run error-correction equation by OLS with HC1 errors.

    Regresses the dependent's first difference on a constant, the lagged
    error-correction term, its own lagged difference, the contemporaneous
    difference of every long-run regressor, and one impulse dummy per
    entry of ``dummies``.

    Parameters
    ----------
    ds : Dataset
        Holds the (transformed) dependent and every long-run regressor on
        the same window the long-run equation was fit on.
    longrun : RegressionResult
        The cointegrating regression; its residuals become the ECT and its
        regressor names define the difference terms.
    dependent : str
        Name of the level series whose difference is modelled.
    dummies : dict, optional
        Ordered mapping of design-column name -> calendar year; each
        becomes a one-year impulse (for example event years 2002, 2020 and
        2008). Years must fall inside the estimation window.

    Returns
    -------
    EcmResult
    """
    y = ds.get(dependent)
    years = np.asarray(y.years, dtype=int)
    yv = np.asarray(y.values, dtype=float)
    n = len(yv)

    ect = build_ect(longrun)
    if not np.array_equal(ect.years, years):
        raise SeriesError(
            "long-run fit window does not match the dependent series window"
        )

    x_names = [nm for nm in longrun.names if nm != CONST]
    xcols = {nm: _aligned_values(ds, nm, years) for nm in x_names}

    dummies = dict(dummies or {})
    k_total = 3 + len(x_names) + len(dummies)
    if n - 2 <= k_total + 1:
        raise SampleTooSmall(
            f"{n} observations leave {n - 2} usable rows for {k_total} parameters"
        )

    fit_years = years[2:]
    design = {
        "ect_l1": np.asarray(ect.values[1:-1], dtype=float),
        f"d_{dependent}_l1": yv[1:-1] - yv[:-2],
    }
    for nm in x_names:
        design[f"d_{nm}"] = xcols[nm][2:] - xcols[nm][1:-1]
    for dname, dyear in dummies.items():
        dyear = int(dyear)
        if dyear < fit_years[0] or dyear > fit_years[-1]:
            raise OutOfWindow(
                f"dummy {dname!r} year {dyear} outside the estimation window "
                f"{fit_years[0]}-{fit_years[-1]}"
            )
        design[dname] = (fit_years == dyear).astype(float)

    dep = yv[2:] - yv[1:-1]
    fit = ols_fit(dep, design, intercept=True, years=fit_years)
    fit = robust_covariance(fit, "HC1")
    psi = fit.coef("ect_l1")
    return EcmResult(
        regression=fit,
        ect_coefficient=psi,
        half_life=_half_life_or_inf(psi),
        dependent=dependent,
        ect_name="ect_l1",
        dy_lag_name=f"d_{dependent}_l1",
        dx_names=tuple(x_names),
        dummy_names=tuple(dummies),
    )


def scenario_paths(ds: Dataset, spec: ScenarioSpec, required=None) -> dict:
    """Project every ruled exogenous variable over the scenario horizon.

    Baseline drift continues each variable at its historical mean annual
    change; shock rules add ``sigma`` historical standard deviations plus
    any absolute ``shift`` as a level displacement from the first horizon
    year onward; fixed rules are echoed verbatim.

    Parameters
    ----------
    ds : Dataset
        Historical (transformed) series the rules are anchored to.
    spec : ScenarioSpec
        Scenario name, horizon and per-variable rules. The horizon must
        start the year after the dataset ends.
    required : iterable of str, optional
        Names that must have a rule; a missing one raises
        :class:`~cointkit.errors.MissingRule`.

    Returns
    -------
    dict
        Variable name -> AnnualSeries over the horizon years.
    """
    first, last = spec.horizon
    sample_end = int(ds.years[-1])
    if first != sample_end + 1:
        raise OutOfWindow(
            f"horizon starts {first}; must start {sample_end + 1}, "
            "the year after the sample ends"
        )
    if required is not None:
        missing = [nm for nm in required if nm not in spec.rules]
        if missing:
            raise MissingRule(
                f"scenario {spec.name!r} has no path rule for {missing}"
            )
    horizon_n = spec.n_years
    out = {}
    for nm, rule in spec.rules.items():
        s = ds.get(nm)
        v = np.asarray(s.values, dtype=float)
        if rule.kind == "fixed":
            vals = np.asarray(rule.values, dtype=float)
            if len(vals) != horizon_n:
                raise SeriesError(
                    f"fixed path for {nm!r} has {len(vals)} values; "
                    f"horizon needs {horizon_n}"
                )
        else:
            if len(v) < 2:
                raise TooShort(f"{nm}: need >= 2 observations to measure drift")
            drift = float(np.diff(v).mean())
            vals = v[-1] + drift * np.arange(1, horizon_n + 1, dtype=float)
            if rule.kind == "shock":
                vals = vals + rule.sigma * float(np.std(v, ddof=1)) + rule.shift
        out[nm] = series_from_values(nm, first, vals)
    return out


def scenario_presets(
    exog,
    demand: str,
    horizon: tuple,
    oil: str | None = None,
    mci: str | None = None,
    oil_shift: float = OIL_SHIFT_HIGH,
    mci_shift: float = MCI_SHIFT_LOW,
) -> tuple:
    """Build the three standard scenarios over one horizon.

    Baseline continues every variable at its historical drift. High demand
    adds a +1 standard deviation shock to the demand index and, when an
    oil series is named, a lower-oil level shift. Low demand applies a -1
    standard deviation demand shock and, when a monetary-conditions series
    is named, a tightening shift.

    Parameters
    ----------
    exog : iterable of str
        Every exogenous variable the model needs a path for.
    demand : str
        The external-demand index name; must be listed in ``exog``.
    horizon : tuple
        ``(first_year, last_year)`` inclusive.
    oil, mci : str, optional
        Names of the ln-oil-price and monetary-conditions series.
    oil_shift, mci_shift : float
        Absolute level shifts used by the high and low scenarios.

    Returns
    -------
    tuple
        ``(baseline, high_demand, low_demand)`` ScenarioSpecs.
    """
    exog = list(exog)
    if demand not in exog:
        raise UnknownName(f"demand index {demand!r} not among exogenous {exog}")
    base = {nm: drift_rule() for nm in exog}
    high = dict(base)
    high[demand] = shock_rule(1.0)
    if oil is not None:
        high[oil] = shock_rule(0.0, shift=oil_shift)
    low = dict(base)
    low[demand] = shock_rule(-1.0)
    if mci is not None:
        low[mci] = shock_rule(0.0, shift=mci_shift)
    return (
        ScenarioSpec("baseline", horizon, base),
        ScenarioSpec("high_demand", horizon, high),
        ScenarioSpec("low_demand", horizon, low),
    )


def ecm_forecast(
    ecm: EcmResult,
    longrun: RegressionResult,
    paths: dict,
    label: str = "ecm",
    back_transform: str = "exp",
):
    """Iterate the fitted error-correction system over projected paths.

    Each year the short-run equation produces the dependent's difference
    from the lagged ECT, the previous difference (the model's own prior
    forecast: dynamic, not static) and the projected regressor
    differences; dummies are zero beyond the sample. The ECT is then
    recomputed from the long-run equation at the projected levels.

    Parameters
    ----------
    ecm : EcmResult
        The fitted short-run equation.
    longrun : RegressionResult
        The cointegrating regression the ECT derives from.
    paths : dict
        Variable name -> AnnualSeries over the horizon; every long-run
        regressor needs a path. All paths must share one year span that
        starts right after the estimation sample.
    label : str
        Model name recorded on the result (for example
        ``"ecm_baseline"``).
    back_transform : str
        ``"exp"`` (plain exponentiation, the default), ``"smearing"``
        (exponentiation times the Duan factor mean(exp(short-run
        residuals))), or ``"none"`` for models fit in levels.

    Returns
    -------
    ForecastResult
    """
    if back_transform not in ("exp", "smearing", "none"):
        raise UnsupportedCase(f"unknown back_transform {back_transform!r}")
    needed = list(ecm.dx_names)
    for nm in longrun.names:
        if nm != CONST and nm not in needed:
            needed.append(nm)
    if not needed:
        raise UnsupportedCase("model has no exogenous variables to project")
    missing = [nm for nm in needed if nm not in paths]
    if missing:
        raise MissingRule(f"no projected path for {missing}")

    ref_years = None
    for nm in needed:
        p = paths[nm]
        if ref_years is None:
            ref_years = np.asarray(p.years, dtype=int)
        elif not np.array_equal(p.years, ref_years):
            raise SeriesError(f"path {nm!r} spans different years than the others")
    reg = ecm.regression
    sample_end = int(reg.years[-1])
    if int(ref_years[0]) != sample_end + 1:
        raise OutOfWindow(
            f"paths start {ref_years[0]}; the sample ends {sample_end}"
        )

    coefs = reg.coefficients()
    c = coefs.get(CONST, 0.0)
    psi = ecm.ect_coefficient
    rho = coefs[ecm.dy_lag_name]
    beta = {nm: coefs[f"d_{nm}"] for nm in ecm.dx_names}
    lr = longrun.coefficients()
    lr_const = lr.get(CONST, 0.0)
    lr_slope = {nm: lr[nm] for nm in longrun.names if nm != CONST}

    y_prev = float(longrun.y[-1])
    dy_prev = float(reg.y[-1])
    ect_prev = float(longrun.residuals[-1])
    x_prev = {
        nm: float(longrun.X[-1, j])
        for j, nm in enumerate(longrun.names)
        if nm != CONST
    }

    transformed = np.empty(len(ref_years))
    for h in range(len(ref_years)):
        x_now = {nm: float(paths[nm].values[h]) for nm in lr_slope}
        dy = c + psi * ect_prev + rho * dy_prev
        for nm in ecm.dx_names:
            dy += beta[nm] * (x_now[nm] - x_prev[nm])
        y_now = y_prev + dy
        locus = lr_const + sum(lr_slope[nm] * x_now[nm] for nm in lr_slope)
        transformed[h] = y_now
        ect_prev = y_now - locus
        dy_prev = dy
        y_prev = y_now
        x_prev = x_now

    if back_transform == "none":
        levels = transformed.copy()
    else:
        levels = np.exp(transformed)
        if back_transform == "smearing":
            levels = levels * float(np.mean(np.exp(reg.residuals)))
    return ForecastResult(
        model=label,
        params={
            "ect_coefficient": psi,
            "half_life": ecm.half_life,
            "back_transform": back_transform,
        },
        years=ref_years,
        transformed=transformed,
        levels=levels,
    )
