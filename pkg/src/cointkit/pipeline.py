"""Sequential pipeline orchestration with typed stage results.

Stages run in a fixed order, each consuming only typed results from the
shared context (never re-parsing emitted files). A stage whose statistical
precondition fails is recorded as skipped with its reason, and downstream
stages that miss an input skip too; the run still completes with a partial
report. Data-loading failures in the first stage propagate, and any
non-domain exception is wrapped in StageError.

All randomness flows from the single config seed through named substreams
("bootstrap", "monte-carlo", "gbm"), so identical config and frozen data
reproduce every numeric table byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cointegration import ardl_bounds_test, dols_fit, engle_granger_test
from .diagnostics import diagnostic_report, granger_causality
from .ecm import (
    PathRule,
    ScenarioSpec,
    ecm_fit,
    ecm_forecast,
    scenario_paths,
    scenario_presets,
)
from .errors import (
    CointkitError,
    ConfigError,
    IoError,
    OutOfWindow,
    StageError,
    SubsampleTooSmall,
    UnsupportedCase,
)
from .forecast import (
    FeatureMatrix,
    arima_fit_forecast,
    build_lagged_features,
    ets_damped_forecast,
    gbm_fit,
    holdout_eval,
    penalized_linear_fit,
    theta_forecast,
)
from .indices import (
    external_demand_index,
    monetary_conditions_index,
    trade_weighted_index,
)
from .ingest import load_csv
from .regress import (
    newey_west_lag,
    ols_fit,
    residual_bootstrap_ci,
    robust_covariance,
    vif,
    wald_joint,
)
from .series import Dataset, difference, log_transform
from .structural import chow_test, sequential_chow
from .unitroot import (
    adf_test,
    classify_integration,
    default_max_lag,
    kpss_test,
    pp_test,
    za_test,
)

#: Stage execution order; every run walks this list.
STAGE_ORDER = (
    "ingest",
    "transforms",
    "indices",
    "unitroots",
    "breaks",
    "cointegration",
    "longrun",
    "dols",
    "ecm",
    "diagnostics",
    "causality",
    "forecasts",
)

_SUBSTREAM_NAMES = ("bootstrap", "monte-carlo", "gbm")


def substream_seed(seed: int, name: str) -> int:
    """Derive a named child seed from the single global seed.

    The name is hashed so adding a new substream never shifts an existing
    one; valid names are "bootstrap", "monte-carlo" and "gbm".
    """
    if name not in _SUBSTREAM_NAMES:
        raise UnsupportedCase(f"unknown substream {name!r}; have {_SUBSTREAM_NAMES}")
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, name: str) -> np.random.Generator:
    """A generator for one named substream of the global seed."""
    return np.random.default_rng(substream_seed(seed, name))


@dataclass(frozen=True)
class Table:
    """One rectangular result table; cells are plain scalars or None."""

    columns: tuple
    rows: tuple

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def as_dicts(self) -> list:
        return [dict(zip(self.columns, r)) for r in self.rows]


@dataclass(frozen=True)
class StageRecord:
    """Outcome of one pipeline stage.

    ``status`` is "ok", "skipped" (precondition unmet, reason recorded) or
    "failed" (a domain error mid-stage, reason recorded). ``notes`` records
    the defaults and derived settings the stage actually used.
    """

    name: str
    status: str
    seconds: float
    tables: dict
    notes: dict
    reason: str | None = None


@dataclass(frozen=True)
class RunReport:
    """All stage records plus provenance for one pipeline run."""

    stages: tuple
    provenance: dict

    def stage(self, name: str) -> StageRecord:
        for rec in self.stages:
            if rec.name == name:
                return rec
        raise KeyError(name)

    def table(self, stage: str, table: str) -> Table:
        return self.stage(stage).tables[table]

    def ok(self, name: str) -> bool:
        try:
            return self.stage(name).status == "ok"
        except KeyError:
            return False


class _Skip(Exception):
    """Internal: stage precondition unmet; message becomes the skip reason."""


def _need(ctx: dict, key: str, stage: str):
    if key not in ctx:
        raise _Skip(f"missing input {key!r}; an upstream stage did not complete")
    return ctx[key]


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _stage_ingest(cfg, ctx):
    raw = load_csv(cfg.data_csv, expected_columns=cfg.columns)
    ctx["raw"] = raw
    ctx["data_sha256"] = hashlib.sha256(Path(cfg.data_csv).read_bytes()).hexdigest()
    rows = []
    for nm in raw.names():
        v = raw.get(nm).values
        rows.append((
            nm, len(v), float(np.mean(v)), float(np.std(v, ddof=1)),
            float(np.min(v)), float(np.max(v)),
        ))
    tables = {
        "descriptives": Table(("series", "n", "mean", "std", "min", "max"), tuple(rows)),
    }
    notes = {"window": f"{raw.start}-{raw.end}", "source": cfg.data_csv}
    return tables, notes


def _stage_transforms(cfg, ctx):
    ds = _need(ctx, "raw", "transforms")
    rows = []
    for c in cfg.log_columns:
        s = log_transform(ds.get(c))
        ds = ds.with_series(s)
        rows.append((c, "log", s.name))
    ctx["ds"] = ds
    if not rows:
        return {"transforms": Table(("input", "transform", "result"), ())}, {}
    return {"transforms": Table(("input", "transform", "result"), tuple(rows))}, {}


def _stage_indices(cfg, ctx):
    ds = _need(ctx, "ds", "indices")
    if not cfg.demand_countries and not cfg.mci_rates:
        raise _Skip("no index inputs configured")
    rows = []
    notes = {}
    path_series = []  # (report column, AnnualSeries); variants are report-only

    def record(idx, column, into_model):
        nonlocal ds
        if into_model:
            ds = ds.with_series(idx.series)
        ratio = None if idx.explained_ratio is None else float(idx.explained_ratio)
        rows.append((column, idx.method, ratio, " ".join(idx.inputs)))
        notes[f"{column}_orientation"] = idx.orientation
        path_series.append((column, idx.series))

    if cfg.demand_countries:
        idx = external_demand_index(ds, cfg.demand_countries)
        record(idx, f"{idx.name}_pca{len(cfg.demand_countries)}", into_model=True)
        if cfg.gulf_countries:
            gulf = external_demand_index(
                ds, cfg.gulf_countries,
                name=f"{idx.name}_gulf{len(cfg.gulf_countries)}",
            )
            record(gulf, gulf.name, into_model=False)
        if cfg.trade_weights:
            tw = trade_weighted_index(
                ds, dict(cfg.trade_weights), cfg.tw_base_year,
                name=f"{idx.name}_tw",
            )
            record(tw, tw.name, into_model=False)
            notes["tw_base_year"] = cfg.tw_base_year
    if cfg.mci_rates:
        idx = monetary_conditions_index(ds, rate_names=cfg.mci_rates)
        record(idx, idx.name, into_model=True)
    ctx["ds"] = ds

    years = [int(yy) for yy in ds.years]
    path_rows = tuple(
        (yy, *(float(s.values[i]) for _, s in path_series))
        for i, yy in enumerate(years)
    )
    tables = {
        "indices": Table(("index", "method", "explained_ratio", "inputs"), tuple(rows)),
        "paths": Table(("year", *(col for col, _ in path_series)), path_rows),
    }
    return tables, notes


def _unitroot_row(nm, s, max_lag):
    adf = adf_test(s, det="c", max_lag=max_lag)
    pp = pp_test(s, det="c")
    kp = kpss_test(s, det="c")
    return (adf, pp, kp), (
        nm,
        float(adf.statistic), float(adf.p_value), int(adf.lags_used),
        float(pp.statistic), float(pp.p_value),
        float(kp.statistic), float(kp.p_value),
    )


def _stage_unitroots(cfg, ctx):
    ds = _need(ctx, "ds", "unitroots")
    names = cfg.model_names()
    missing = [nm for nm in names if nm not in set(ds.names())]
    if missing:
        raise _Skip(f"model series missing from dataset: {missing}")
    max_lag = cfg.adf_max_lag if cfg.adf_max_lag is not None else default_max_lag(len(ds.years))

    level_rows, diff_rows, class_rows = [], [], []
    integration = {}
    for nm in names:
        s = ds.get(nm)
        level_tests, lrow = _unitroot_row(nm, s, max_lag)
        d = difference(s, 1)
        diff_tests, drow = _unitroot_row(nm, d, max_lag)
        order = classify_integration(level_tests, diff_tests)
        integration[nm] = order
        level_rows.append(lrow)
        diff_rows.append(drow)
        class_rows.append((nm, order))
    ctx["integration"] = integration

    za = za_test(ds.get(cfg.dependent), model="intercept")
    za_rows = ((cfg.dependent, float(za.statistic), int(za.break_year),
                float(za.p_value)),)

    cols = ("series", "adf_stat", "adf_p", "adf_lags", "pp_stat", "pp_p",
            "kpss_stat", "kpss_p")
    tables = {
        "levels": Table(cols, tuple(level_rows)),
        "differences": Table(cols, tuple(diff_rows)),
        "classification": Table(("series", "order"), tuple(class_rows)),
        "za": Table(("series", "statistic", "break_year", "p_value"), za_rows),
    }
    return tables, {"adf_max_lag": max_lag, "deterministic": "constant"}


def _stage_breaks(cfg, ctx):
    ds = _need(ctx, "ds", "breaks")
    if not cfg.chow_candidates:
        raise _Skip("no chow candidate years configured")
    feasible, infeasible = [], []
    for by in cfg.chow_candidates:
        try:
            feasible.append(chow_test(ds, cfg.dependent, cfg.longrun, by))
        except (SubsampleTooSmall, OutOfWindow) as exc:
            infeasible.append((by, str(exc)))
    if not feasible:
        raise _Skip(
            "no feasible chow candidate: "
            + "; ".join(reason for _, reason in infeasible)
        )
    results, dominant = sequential_chow(
        ds, cfg.dependent, cfg.longrun, [r.year for r in feasible]
    )
    ctx["dominant_break"] = dominant
    rows = tuple(
        (int(r.year), float(r.f_statistic), float(r.p_value),
         bool(r.rejects(0.05)), r.year == dominant)
        for r in results
    )
    tables = {"chow": Table(("year", "f_statistic", "p_value", "significant_5pct",
                             "dominant"), rows)}
    if infeasible:
        tables["infeasible"] = Table(("year", "reason"), tuple(infeasible))
    return tables, {"dominant": dominant}


def _stage_cointegration(cfg, ctx):
    ds = _need(ctx, "ds", "cointegration")
    integration = _need(ctx, "integration", "cointegration")
    bad = {nm: o for nm, o in integration.items() if o in ("I2", "ambiguous")}
    if bad:
        raise _Skip(f"integration orders outside I(0)/I(1): {bad}")
    y = ds.get(cfg.dependent)
    xs = {nm: ds.get(nm) for nm in cfg.longrun}

    bounds = ardl_bounds_test(
        y, xs, p=cfg.bounds_p, q=cfg.bounds_q, case=cfg.bounds_case,
        integration_orders=integration,
    )
    eg = engle_granger_test(y, xs)
    ctx["bounds"] = bounds
    ctx["engle_granger"] = eg

    brows = tuple(
        (float(lv), float(b[0]), float(b[1]), bounds.verdict(lv))
        for lv, b in sorted(bounds.critical_bounds.items())
    )
    tables = {
        "bounds": Table(
            ("level", "lower_i0", "upper_i1", "verdict"), brows
        ),
        "bounds_summary": Table(
            ("f_statistic", "k", "case", "p_lag", "q_lag", "nobs"),
            ((float(bounds.f_statistic), bounds.k, bounds.case,
              int(bounds.lags[0]), int(bounds.lags[1]), bounds.nobs),),
        ),
        "engle_granger": Table(
            ("tau", "p_value", "lag", "rejects_1pct"),
            ((float(eg.statistic), float(eg.p_value), int(eg.params["lag"]),
              bool(eg.rejects(0.01))),),
        ),
    }
    return tables, {"case": cfg.bounds_case, "max_p": cfg.bounds_p, "max_q": cfg.bounds_q}


def _inference_rows(reg):
    return tuple(
        (row["name"], float(row["coef"]), float(row["se"]), float(row["t"]),
         float(row["p"]))
        for row in reg.inference_table()
    )


def _stage_longrun(cfg, ctx):
    ds = _need(ctx, "ds", "longrun")
    y = ds.get(cfg.dependent)
    xs = {nm: ds.get(nm) for nm in cfg.longrun}
    hac_lag = cfg.hac_lag if cfg.hac_lag is not None else newey_west_lag(len(y))

    base = ols_fit(y, xs)
    reg = robust_covariance(base, "HAC", lag=hac_lag)
    ctx["longrun"] = reg

    vifs = vif(xs)
    joint = wald_joint(reg, cfg.longrun)
    cis = residual_bootstrap_ci(
        y, xs, reps=cfg.bootstrap_reps,
        seed=substream_seed(cfg.seed, "bootstrap"),
    )
    tables = {
        "coefficients": Table(("name", "coef", "se", "t", "p"), _inference_rows(reg)),
        "vif": Table(("name", "vif"), tuple((nm, float(v)) for nm, v in vifs.items())),
        "wald_slopes": Table(
            ("statistic", "p_value", "distribution"),
            ((float(joint.statistic), float(joint.p_value), joint.distribution),),
        ),
        "bootstrap_ci": Table(
            ("name", "lower", "upper"),
            tuple((nm, float(lo), float(hi)) for nm, (lo, hi) in cis.items()),
        ),
        "fit": Table(
            ("r_squared", "rss", "n", "k", "cov_kind"),
            ((float(reg.r_squared), float(reg.rss), reg.n, reg.k, reg.cov_kind),),
        ),
    }
    notes = {"hac_lag": hac_lag, "bootstrap_reps": cfg.bootstrap_reps,
             "bootstrap_seed_substream": "bootstrap"}
    return tables, notes


def _stage_dols(cfg, ctx):
    ds = _need(ctx, "ds", "dols")
    y = ds.get(cfg.dependent)
    xs = {nm: ds.get(nm) for nm in cfg.longrun}
    hac_lag = cfg.hac_lag if cfg.hac_lag is not None else newey_west_lag(len(y))
    res = dols_fit(y, xs, leads=cfg.dols_leads, lags=cfg.dols_lags, hac_lag=hac_lag)
    rows = tuple(
        (row["name"], float(row["coef"]), float(row["se"]), float(row["t"]),
         float(row["p"]))
        for row in res.long_run_table()
    )
    tables = {"long_run": Table(("name", "coef", "se", "t", "p"), rows)}
    return tables, {"leads": cfg.dols_leads, "lags": cfg.dols_lags, "hac_lag": hac_lag}


def _stage_ecm(cfg, ctx):
    ds = _need(ctx, "ds", "ecm")
    longrun = _need(ctx, "longrun", "ecm")
    dummies = dict(cfg.dummies) if cfg.dummies else None
    res = ecm_fit(ds, longrun, cfg.dependent, dummies=dummies)
    ctx["ecm"] = res
    tables = {
        "coefficients": Table(("name", "coef", "se", "t", "p"),
                              _inference_rows(res.regression)),
        "adjustment": Table(
            ("ect_coefficient", "half_life_years", "r_squared", "n"),
            ((float(res.ect_coefficient), float(res.half_life),
              float(res.regression.r_squared), res.regression.n),),
        ),
    }
    notes = {"dummies": dict(cfg.dummies), "covariance": res.regression.cov_kind}
    return tables, notes


def _stage_diagnostics(cfg, ctx):
    ecm = _need(ctx, "ecm", "diagnostics")
    rep = diagnostic_report(ecm.regression)
    ctx["diagnostics"] = rep
    rows = tuple(
        (t.name, float(t.statistic), float(t.p_value), t.distribution,
         bool(t.rejects(0.05)))
        for t in rep.tests
    )
    path_cols = ("year", "statistic", "lower", "upper")
    tables = {
        "tests": Table(("test", "statistic", "p_value", "distribution",
                        "rejects_5pct"), rows),
        "stability": Table(
            ("test", "crosses_band", "level"),
            (("cusum", bool(rep.cusum.crosses), float(rep.cusum.level)),
             ("cusumsq", bool(rep.cusumsq.crosses), float(rep.cusumsq.level))),
        ),
        "cusum_path": Table(path_cols, tuple(
            (r["year"], r["statistic"], r["lower"], r["upper"])
            for r in rep.cusum.rows()
        )),
        "cusumsq_path": Table(path_cols, tuple(
            (r["year"], r["statistic"], r["lower"], r["upper"])
            for r in rep.cusumsq.rows()
        )),
    }
    return tables, {"failures_5pct": rep.failures(0.05)}


def _stationary_form(ds, nm, order):
    if order == "I0":
        return ds.get(nm)
    return difference(ds.get(nm), 1)


def _stage_causality(cfg, ctx):
    ds = _need(ctx, "ds", "causality")
    integration = _need(ctx, "integration", "causality")
    names = cfg.model_names()
    forms = {nm: _stationary_form(ds, nm, integration[nm]) for nm in names}
    start = max(s.start for s in forms.values())
    end = min(s.end for s in forms.values())
    stat_ds = Dataset(
        {s.name: s.window(start, end) for s in forms.values()}, (start, end)
    )
    rows = []
    for x in cfg.longrun:
        fwd = granger_causality(stat_ds, forms[x].name, forms[cfg.dependent].name)
        rev = granger_causality(stat_ds, forms[cfg.dependent].name, forms[x].name)
        rows.append((x, cfg.dependent, float(fwd.statistic), float(fwd.p_value),
                     bool(fwd.rejects(0.05))))
        rows.append((cfg.dependent, x, float(rev.statistic), float(rev.p_value),
                     bool(rev.rejects(0.05))))
    tables = {"granger": Table(
        ("cause", "effect", "f_statistic", "p_value", "rejects_5pct"), tuple(rows)
    )}
    notes = {"max_lag": 2, "forms": {nm: forms[nm].name for nm in names}}
    return tables, notes


def _scale_demand(spec, demand, factor):
    rules = dict(spec.rules)
    rule = rules.get(demand)
    if rule is not None and rule.kind == "shock" and rule.sigma != 0.0:
        rules[demand] = PathRule("shock", sigma=rule.sigma * factor, shift=rule.shift)
    return ScenarioSpec(spec.name, spec.horizon, rules)


def _subset_features(F, mask, next_year, next_row):
    return FeatureMatrix(
        years=F.years[mask],
        names=F.names,
        X=F.X[mask],
        y=F.y[mask],
        target=F.target,
        next_year=int(next_year),
        next_row=np.asarray(next_row, dtype=float),
    )


def _ml_holdout_metrics(cfg, ds, dep, cutoff, holdout_years, back):
    """One-step-ahead holdout scores for the penalized and boosted models.

    Models are fit once on rows up to the cutoff year, then predict each
    holdout year from its actual lagged features. Features are the model's
    own information set: the dependent plus the long-run regressors.
    """
    F = build_lagged_features(ds, 1, dep, features=list(cfg.model_names()))
    train_mask = F.years <= cutoff
    hold_mask = np.isin(F.years, holdout_years)
    if not np.all(np.isin(holdout_years, F.years[hold_mask])):
        raise _Skip("holdout years not fully covered by the feature matrix")
    Ftr = _subset_features(F, train_mask, holdout_years[0], F.X[hold_mask][0])
    actual_t = F.y[hold_mask]
    if back == "exp":
        actual_lv = np.exp(actual_t)
    else:
        actual_lv = actual_t.copy()

    out = {}
    for kind in ("ridge", "lasso", "elastic_net"):
        model, _ = penalized_linear_fit(Ftr, kind, lam=None)
        pred_t = model.predict(F.X[hold_mask])
        out[kind] = (pred_t, {"lam": model.lam})
    gmodel, _ = gbm_fit(Ftr)
    out["gbm"] = (gmodel.predict(F.X[hold_mask]),
                  {"trees": len(gmodel.trees), "depth": 2, "learning_rate": 0.05})

    metrics = {}
    for nm, (pred_t, params) in out.items():
        lv = np.exp(pred_t) if back == "exp" else pred_t
        mape = float(np.mean(np.abs(lv - actual_lv) / np.abs(actual_lv))) * 100.0
        rmse = float(np.sqrt(np.mean((pred_t - actual_t) ** 2)))
        metrics[nm] = {"mape": mape, "rmse": rmse, "params": params}
    return metrics


def _stage_forecasts(cfg, ctx):
    ds = _need(ctx, "ds", "forecasts")
    ecm = _need(ctx, "ecm", "forecasts")
    longrun = _need(ctx, "longrun", "forecasts")
    dep = cfg.dependent
    s = ds.get(dep)
    back = cfg.back_transform

    univariate = {
        "arima": lambda train, h: arima_fit_forecast(train, h),
        "ets": lambda train, h: ets_damped_forecast(train, h),
        "theta": lambda train, h: theta_forecast(train, h),
    }
    hold = holdout_eval(univariate, s, holdout=cfg.holdout, back_transform=back)
    cutoff = s.end - cfg.holdout
    ml = _ml_holdout_metrics(
        cfg, ds, dep, cutoff, np.asarray(hold.holdout_years, dtype=int), back
    )

    metric_rows = []
    for nm in univariate:
        m = hold.metrics[nm]
        metric_rows.append((nm, "univariate", float(m["mape"]), float(m["rmse"]),
                            nm == hold.best_mape, nm == hold.best_rmse))
    best_ml_mape = min(ml, key=lambda k: ml[k]["mape"])
    best_ml_rmse = min(ml, key=lambda k: ml[k]["rmse"])
    for nm, m in ml.items():
        metric_rows.append((nm, "ml", float(m["mape"]), float(m["rmse"]),
                            nm == best_ml_mape, nm == best_ml_rmse))

    horizon_end = cfg.horizon_end if cfg.horizon_end is not None else s.end + 6
    if horizon_end <= s.end:
        raise _Skip(f"horizon_end {horizon_end} not beyond sample end {s.end}")
    horizon = (s.end + 1, horizon_end)
    h = horizon_end - s.end

    ets_fc = ets_damped_forecast(s, h, back_transform=back)

    scen_rows, path_cols_by_name = [], {}
    if cfg.demand is not None:
        presets = scenario_presets(
            cfg.longrun, cfg.demand, horizon, oil=cfg.oil, mci=cfg.mci,
            oil_shift=cfg.oil_shift_high, mci_shift=cfg.mci_shift_low,
        )
        if cfg.demand_sigma != 1.0:
            presets = tuple(_scale_demand(spec, cfg.demand, cfg.demand_sigma)
                            for spec in presets)
        for spec in presets:
            for nm, rule in spec.rules.items():
                scen_rows.append((spec.name, nm, rule.kind, float(rule.sigma),
                                  float(rule.shift)))
            paths = scenario_paths(ds, spec, required=cfg.longrun)
            fc = ecm_forecast(ecm, longrun, paths,
                              label=f"ecm_{spec.name}", back_transform=back)
            path_cols_by_name[spec.name] = fc

    years_hist = [int(yy) for yy in s.years]
    years_fut = list(range(horizon[0], horizon[1] + 1))
    actual_lv = np.exp(s.values) if back == "exp" else s.values
    frows = []
    for i, yy in enumerate(years_hist):
        frows.append((yy, float(actual_lv[i]), None, None, None, None))
    for j, yy in enumerate(years_fut):
        base_fc = path_cols_by_name.get("baseline")
        high_fc = path_cols_by_name.get("high_demand")
        low_fc = path_cols_by_name.get("low_demand")
        frows.append((
            yy,
            None,
            float(ets_fc.levels[j]),
            float(base_fc.levels[j]) if base_fc else None,
            float(high_fc.levels[j]) if high_fc else None,
            float(low_fc.levels[j]) if low_fc else None,
        ))

    tables = {
        "holdout_metrics": Table(
            ("model", "family", "mape", "rmse", "best_mape", "best_rmse"),
            tuple(metric_rows),
        ),
        "forecast_paths": Table(
            ("year", "actual", "ets", "ecm_baseline", "ecm_high", "ecm_low"),
            tuple(frows),
        ),
        "scenario_rules": Table(
            ("scenario", "variable", "rule", "sigma", "shift"), tuple(scen_rows)
        ),
    }
    notes = {
        "holdout_years": list(hold.holdout_years),
        "best_univariate_mape": hold.best_mape,
        "best_univariate_rmse": hold.best_rmse,
        "horizon": list(horizon),
        "back_transform": back,
        "ect_coefficient": float(ecm.ect_coefficient),
        "half_life_years": float(ecm.half_life),
        "oil_shift_high": float(cfg.oil_shift_high),
        "mci_shift_low": float(cfg.mci_shift_low),
        "ml_lambda": {nm: ml[nm]["params"] for nm in ml},
    }
    return tables, notes


_STAGES = {
    "ingest": _stage_ingest,
    "transforms": _stage_transforms,
    "indices": _stage_indices,
    "unitroots": _stage_unitroots,
    "breaks": _stage_breaks,
    "cointegration": _stage_cointegration,
    "longrun": _stage_longrun,
    "dols": _stage_dols,
    "ecm": _stage_ecm,
    "diagnostics": _stage_diagnostics,
    "causality": _stage_causality,
    "forecasts": _stage_forecasts,
}


def run_pipeline(cfg, through: str | None = None) -> RunReport:
    """Execute the pipeline stages in order and collect a RunReport.

    Parameters
    ----------
    cfg : PipelineConfig
    through : str, optional
        Stop after this stage (inclusive); default runs everything.

    Returns
    -------
    RunReport

    Raises
    ------
    ConfigError
        Unknown ``through`` stage.
    StageError
        A stage raised a non-domain exception; domain errors inside a stage
        are recorded on its StageRecord instead. Errors while loading the
        input data propagate unchanged so callers can distinguish data
        problems from computation problems.
    """
    if through is not None and through not in STAGE_ORDER:
        raise ConfigError(f"unknown stage {through!r}; have {STAGE_ORDER}")
    ctx: dict = {}
    records = []
    for name in STAGE_ORDER:
        t0 = time.perf_counter()
        try:
            tables, notes = _STAGES[name](cfg, ctx)
            rec = StageRecord(name, "ok", time.perf_counter() - t0, tables, notes)
        except _Skip as sk:
            rec = StageRecord(name, "skipped", time.perf_counter() - t0, {}, {}, str(sk))
        except CointkitError as exc:
            if name == "ingest":
                raise
            rec = StageRecord(
                name, "failed", time.perf_counter() - t0, {}, {},
                f"{type(exc).__name__}: {exc}",
            )
        except Exception as exc:  # noqa: BLE001 - wrapped per contract
            raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
        records.append(rec)
        if name == through:
            break
    provenance = {
        "config_sha256": cfg.source_digest or "unhashed",
        "data_sha256": ctx.get("data_sha256", "unavailable"),
        "toolkit_version": __version__,
        "seed": cfg.seed,
    }
    return RunReport(stages=tuple(records), provenance=provenance)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_FORMATS = ("csv", "json", "text")


def _cell_csv(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _render_csv(rec: StageRecord) -> str:
    if rec.status != "ok":
        return f"# stage: {rec.name}\n# status: {rec.status}\n# reason: {rec.reason}\n"
    parts = []
    for tname, table in rec.tables.items():
        parts.append(f"# table: {tname}")
        parts.append(",".join(table.columns))
        for row in table.rows:
            parts.append(",".join(_cell_csv(v) for v in row))
        parts.append("")
    return "\n".join(parts)


def _render_json(rec: StageRecord) -> str:
    doc = {
        "stage": rec.name,
        "status": rec.status,
        "reason": rec.reason,
        "notes": rec.notes,
        "tables": {
            tname: {"columns": list(t.columns), "rows": [list(r) for r in t.rows]}
            for tname, t in rec.tables.items()
        },
    }
    return json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"


def _render_text(rec: StageRecord) -> str:
    lines = [f"stage: {rec.name}", f"status: {rec.status}"]
    if rec.status != "ok":
        lines.append(f"reason: {rec.reason}")
        return "\n".join(lines) + "\n"
    for key, val in rec.notes.items():
        lines.append(f"note {key}: {val}")
    for tname, table in rec.tables.items():
        lines.append("")
        lines.append(f"[{tname}]")
        cells = [tuple(table.columns)] + [
            tuple(_cell_text(v) for v in row) for row in table.rows
        ]
        widths = [max(len(r[i]) for r in cells) for i in range(len(table.columns))]
        for r in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


_RENDERERS = {"csv": _render_csv, "json": _render_json, "text": _render_text}
_PLOT_TABLES = (
    ("indices", "paths", "indices.csv"),
    ("forecasts", "forecast_paths", "forecast_paths.csv"),
    ("diagnostics", "cusum_path", "cusum.csv"),
    ("diagnostics", "cusumsq_path", "cusumsq.csv"),
)


def _plain_csv(table: Table) -> str:
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_cell_csv(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, out_dir, formats=_FORMATS) -> list:
    """Write one file per stage per format, plus plot-ready CSVs.

    Skipped and failed stages get stub files carrying the reason. The
    forecast and stability trajectories additionally land in dedicated
    ``forecast_paths.csv``, ``cusum.csv`` and ``cusumsq.csv`` files, and a
    ``run_summary.txt`` records provenance and per-stage timing.

    Returns the list of written paths.

    Raises
    ------
    ConfigError
        Unknown format name.
    IoError
        Filesystem failure.
    """
    for fmt in formats:
        if fmt not in _RENDERERS:
            raise ConfigError(f"unknown report format {fmt!r}; have {sorted(_RENDERERS)}")
    out = Path(out_dir)
    written = []
    ext = {"csv": "csv", "json": "json", "text": "txt"}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for rec in report.stages:
            for fmt in formats:
                p = out / f"{rec.name}.{ext[fmt]}"
                p.write_text(_RENDERERS[fmt](rec), encoding="utf-8")
                written.append(p)
        for stage, tname, fname in _PLOT_TABLES:
            try:
                table = report.table(stage, tname)
            except KeyError:
                continue
            p = out / fname
            p.write_text(_plain_csv(table), encoding="utf-8")
            written.append(p)
        summary = [f"{k}: {v}" for k, v in report.provenance.items()]
        summary.append("")
        for rec in report.stages:
            summary.append(f"{rec.name}: {rec.status} ({rec.seconds:.3f}s)")
        p = out / "run_summary.txt"
        p.write_text("\n".join(summary) + "\n", encoding="utf-8")
        written.append(p)
    except OSError as exc:
        raise IoError(f"cannot write report under {out}: {exc}") from exc
    return written
