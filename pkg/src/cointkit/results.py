"""Shared result containers: hypothesis tests and forecasts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test.

    Attributes
    ----------
    name : str
        Short identifier of the test (``"adf"``, ``"wald"``, ...).
    statistic : float
    p_value : float
        Point p-value, or a clamp bound for table-based tests (see
        ``p_bound``).
    distribution : str
        Reference distribution the p-value came from, e.g. ``"t(26)"``,
        ``"F(5, 26)"``, ``"chi2(2)"`` or ``"response-surface"``.
    p_bound : str or None
        ``None`` for an exact/point p-value; ``"le"`` when the true p-value
        is at most ``p_value`` (statistic beyond the most extreme tabulated
        critical value); ``"ge"`` when it is at least ``p_value``.
    crit_values : dict
        Optional mapping of level -> critical value for table-based tests.
    params : dict
        Test metadata: lags, deterministic case, break year, dof, etc.
    """

    name: str
    statistic: float
    p_value: float
    distribution: str
    p_bound: str | None = None
    crit_values: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def rejects(self, level: float) -> bool:
        """Whether the null is rejected at the given significance level."""
        if self.p_bound == "le":
            return self.p_value <= level
        return self.p_value < level

    @property
    def verdicts(self) -> dict:
        """Rejection verdicts at the conventional 1%, 5% and 10% levels."""
        return {lv: self.rejects(lv) for lv in (0.01, 0.05, 0.10)}

    def describe(self) -> str:
        bound = {"le": "<=", "ge": ">="}.get(self.p_bound, "=")
        return (
            f"{self.name}: stat={self.statistic:.4f}, p{bound}{self.p_value:.4f} "
            f"[{self.distribution}]"
        )


@dataclass(frozen=True)
class ForecastResult:
    """Point forecasts from one model, on both modelling and level scales.

    Attributes
    ----------
    model : str
        Model identifier (``"arima"``, ``"ets"``, ``"ecm_baseline"``, ...).
    params : dict
        Fitted parameters and settings worth reporting.
    years : ndarray
        Contiguous forecast years, starting the year after training ends.
    transformed : ndarray
        Point forecasts on the scale the model was fit on (often ln).
    levels : ndarray
        Back-transformed level forecasts, same length as ``years``.
    mape : float or None
        Holdout mean absolute percentage error on levels, when evaluated.
    rmse : float or None
        Holdout root mean squared error on the transformed scale.
    """

    model: str
    params: dict
    years: np.ndarray
    transformed: np.ndarray
    levels: np.ndarray
    mape: float | None = None
    rmse: float | None = None

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        if len(years) == 0:
            raise ValueError("forecast horizon is empty")
        if len(years) > 1 and not np.all(np.diff(years) == 1):
            raise ValueError("forecast years must be contiguous")
        if not (len(years) == len(self.transformed) == len(self.levels)):
            raise ValueError("years, transformed and levels must share one length")

    def level_at(self, year: int) -> float:
        idx = np.flatnonzero(np.asarray(self.years, dtype=int) == int(year))
        if idx.size == 0:
            raise KeyError(f"year {year} outside forecast horizon")
        return float(self.levels[idx[0]])

    def rows(self) -> list:
        return [
            {"year": int(y), "transformed": float(t), "level": float(lv)}
            for y, t, lv in zip(self.years, self.transformed, self.levels)
        ]
