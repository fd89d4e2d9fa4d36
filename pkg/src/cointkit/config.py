"""Declarative pipeline configuration: YAML schema, defaults, validation.

The config is a single tree-structured file. Validation is strict: unknown
keys anywhere are hard errors, every error names the offending key path,
and all referential checks (dependent series, long-run regressors, scenario
variables) run before any computation touches data.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError

#: ln(0.9): the high-demand scenario's oil-price level shift.
DEFAULT_OIL_SHIFT = math.log(0.9)
#: Monetary tightening added to the low-demand scenario, in index units.
DEFAULT_MCI_SHIFT = 0.5


@dataclass(frozen=True)
class PipelineConfig:
    """Validated settings for one pipeline run.

    Field groups mirror the config file: data location and column roster,
    transform and index construction lists, variable roles, impulse-dummy
    years, test settings, forecast/scenario settings, and output.
    """

    seed: int
    data_csv: str
    columns: tuple
    log_columns: tuple
    demand_countries: tuple
    mci_rates: tuple
    gulf_countries: tuple
    trade_weights: tuple
    tw_base_year: int
    dependent: str
    longrun: tuple
    dummies: tuple
    adf_max_lag: int | None
    hac_lag: int | None
    chow_candidates: tuple
    bounds_p: int
    bounds_q: int
    bounds_case: int
    dols_leads: int
    dols_lags: int
    bootstrap_reps: int
    horizon_end: int | None
    holdout: int
    back_transform: str
    demand: str | None
    oil: str | None
    mci: str | None
    demand_sigma: float
    oil_shift_high: float
    mci_shift_low: float
    out_dir: str
    fetch_year_range: tuple | None = None
    fetch_cache_dir: str | None = None
    source_digest: str | None = None

    def resolvable_names(self) -> set:
        """Every series name a stage can reference once transforms ran."""
        names = set(self.columns)
        names |= {f"ln_{c}" for c in self.log_columns}
        if self.demand_countries:
            names.add("ext_demand")
        if self.mci_rates:
            names.add("mci")
        return names

    def model_names(self) -> tuple:
        return (self.dependent, *self.longrun)


def _expect_mapping(node, path: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return dict(node)


def _reject_unknown(node: dict, known, path: str):
    extra = [k for k in node if k not in known]
    if extra:
        raise ConfigError(f"{path}.{extra[0]}: unknown key")


def _take_str(node: dict, key: str, path: str, required=False, default=None):
    if key not in node or node[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: required key missing")
        return default
    v = node[key]
    if not isinstance(v, str) or not v.strip():
        raise ConfigError(f"{path}.{key}: expected a nonempty string, got {v!r}")
    return v


def _take_int(node: dict, key: str, path: str, required=False, default=None, minimum=None):
    if key not in node or node[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: required key missing")
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}: {v} below minimum {minimum}")
    return v


def _take_float(node: dict, key: str, path: str, default=None):
    if key not in node or node[key] is None:
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _take_str_list(node: dict, key: str, path: str, default=()):
    if key not in node or node[key] is None:
        return tuple(default)
    v = node[key]
    if isinstance(v, str) or not isinstance(v, list):
        raise ConfigError(f"{path}.{key}: expected a list of names, got {v!r}")
    out = []
    for i, item in enumerate(v):
        if not isinstance(item, str) or not item.strip():
            raise ConfigError(f"{path}.{key}[{i}]: expected a name, got {item!r}")
        out.append(item)
    return tuple(out)


def _take_int_list(node: dict, key: str, path: str, default=()):
    if key not in node or node[key] is None:
        return tuple(default)
    v = node[key]
    if not isinstance(v, list):
        raise ConfigError(f"{path}.{key}: expected a list of integers, got {v!r}")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, int):
            raise ConfigError(f"{path}.{key}[{i}]: expected an integer, got {item!r}")
        out.append(item)
    return tuple(out)


def parse_config(tree, base_dir=".", source_digest=None) -> PipelineConfig:
    """Validate a parsed config tree into a PipelineConfig.

    Parameters
    ----------
    tree : dict
        Parsed YAML mapping.
    base_dir : path-like
        Directory against which relative data/output paths are resolved.
    source_digest : str, optional
        Checksum of the config file, carried into run provenance.

    Raises
    ------
    ConfigError
        Any structural, type, or referential problem, naming the key path.
    """
    tree = _expect_mapping(tree, "config")
    _reject_unknown(
        tree,
        {"seed", "data", "transforms", "indices", "variables", "dummies",
         "tests", "forecast", "scenarios", "output"},
        "config",
    )
    base = Path(base_dir)

    seed = _take_int(tree, "seed", "config", required=True)

    data = _expect_mapping(tree.get("data"), "data")
    _reject_unknown(data, {"csv", "columns", "fetch"}, "data")
    data_csv = _take_str(data, "csv", "data", required=True)
    columns = _take_str_list(data, "columns", "data")
    if not columns:
        raise ConfigError("data.columns: required key missing")
    if len(set(columns)) != len(columns):
        raise ConfigError("data.columns: duplicate names")
    fetch = _expect_mapping(data.get("fetch"), "data.fetch")
    _reject_unknown(fetch, {"years", "cache_dir"}, "data.fetch")
    fetch_years = _take_int_list(fetch, "years", "data.fetch")
    if fetch_years and len(fetch_years) != 2:
        raise ConfigError("data.fetch.years: expected [first, last]")
    fetch_cache = _take_str(fetch, "cache_dir", "data.fetch")

    transforms = _expect_mapping(tree.get("transforms"), "transforms")
    _reject_unknown(transforms, {"log"}, "transforms")
    log_columns = _take_str_list(transforms, "log", "transforms")
    for c in log_columns:
        if c not in columns:
            raise ConfigError(f"transforms.log: {c!r} is not a data column")

    indices = _expect_mapping(tree.get("indices"), "indices")
    _reject_unknown(
        indices,
        {"external_demand", "mci", "gulf", "trade_weights", "base_year"},
        "indices",
    )
    demand_countries = _take_str_list(indices, "external_demand", "indices")
    mci_rates = _take_str_list(indices, "mci", "indices")
    gulf_countries = _take_str_list(indices, "gulf", "indices")
    weights_node = _expect_mapping(indices.get("trade_weights"), "indices.trade_weights")
    trade_weights = []
    for nm, w in weights_node.items():
        if isinstance(w, bool) or not isinstance(w, (int, float)) or w < 0:
            raise ConfigError(
                f"indices.trade_weights.{nm}: expected a nonnegative weight, got {w!r}"
            )
        trade_weights.append((str(nm), float(w)))
    trade_weights = tuple(trade_weights)
    tw_base_year = _take_int(indices, "base_year", "indices", default=2010)
    if gulf_countries and not set(gulf_countries) <= set(demand_countries):
        extra = sorted(set(gulf_countries) - set(demand_countries))
        raise ConfigError(f"indices.gulf: {extra} not in indices.external_demand")
    weight_names = tuple(nm for nm, _ in trade_weights)
    for c in (*demand_countries, *mci_rates, *gulf_countries, *weight_names):
        if c not in columns and c not in {f"ln_{v}" for v in log_columns}:
            raise ConfigError(f"indices: input {c!r} is not a resolvable column")

    variables = _expect_mapping(tree.get("variables"), "variables")
    _reject_unknown(variables, {"dependent", "longrun"}, "variables")
    if isinstance(variables.get("dependent"), list):
        raise ConfigError("variables.dependent: exactly one dependent variable required")
    dependent = _take_str(variables, "dependent", "variables", required=True)
    longrun = _take_str_list(variables, "longrun", "variables")
    if not longrun:
        raise ConfigError("variables.longrun: required key missing")
    if dependent in longrun:
        raise ConfigError("variables.longrun: contains the dependent variable")

    dummies_node = _expect_mapping(tree.get("dummies"), "dummies")
    dummies = []
    for name, year in dummies_node.items():
        if isinstance(year, bool) or not isinstance(year, int):
            raise ConfigError(f"dummies.{name}: expected a year, got {year!r}")
        dummies.append((str(name), year))
    dummies = tuple(dummies)

    tests = _expect_mapping(tree.get("tests"), "tests")
    _reject_unknown(
        tests,
        {"adf_max_lag", "hac_lag", "chow_candidates", "bounds", "dols", "bootstrap_reps"},
        "tests",
    )
    adf_max_lag = _take_int(tests, "adf_max_lag", "tests", minimum=0)
    hac_lag = _take_int(tests, "hac_lag", "tests", minimum=0)
    chow_candidates = _take_int_list(tests, "chow_candidates", "tests")
    bounds = _expect_mapping(tests.get("bounds"), "tests.bounds")
    _reject_unknown(bounds, {"p", "q", "case"}, "tests.bounds")
    bounds_p = _take_int(bounds, "p", "tests.bounds", default=2, minimum=1)
    bounds_q = _take_int(bounds, "q", "tests.bounds", default=2, minimum=0)
    bounds_case = _take_int(bounds, "case", "tests.bounds", default=3)
    dols = _expect_mapping(tests.get("dols"), "tests.dols")
    _reject_unknown(dols, {"leads", "lags"}, "tests.dols")
    dols_leads = _take_int(dols, "leads", "tests.dols", default=1, minimum=0)
    dols_lags = _take_int(dols, "lags", "tests.dols", default=1, minimum=0)
    bootstrap_reps = _take_int(tests, "bootstrap_reps", "tests", default=999, minimum=100)

    forecast = _expect_mapping(tree.get("forecast"), "forecast")
    _reject_unknown(forecast, {"horizon_end", "holdout", "back_transform"}, "forecast")
    horizon_end = _take_int(forecast, "horizon_end", "forecast")
    holdout = _take_int(forecast, "holdout", "forecast", default=5, minimum=1)
    back_transform = _take_str(forecast, "back_transform", "forecast", default="exp")
    if back_transform not in ("exp", "none"):
        raise ConfigError(
            f"forecast.back_transform: expected 'exp' or 'none', got {back_transform!r}"
        )

    scenarios = _expect_mapping(tree.get("scenarios"), "scenarios")
    _reject_unknown(
        scenarios,
        {"demand", "oil", "mci", "demand_sigma", "oil_shift_high", "mci_shift_low"},
        "scenarios",
    )
    demand = _take_str(scenarios, "demand", "scenarios")
    oil = _take_str(scenarios, "oil", "scenarios")
    mci = _take_str(scenarios, "mci", "scenarios")
    demand_sigma = _take_float(scenarios, "demand_sigma", "scenarios", default=1.0)
    oil_shift_high = _take_float(
        scenarios, "oil_shift_high", "scenarios", default=DEFAULT_OIL_SHIFT
    )
    mci_shift_low = _take_float(
        scenarios, "mci_shift_low", "scenarios", default=DEFAULT_MCI_SHIFT
    )

    output = _expect_mapping(tree.get("output"), "output")
    _reject_unknown(output, {"dir"}, "output")
    out_dir = _take_str(output, "dir", "output", default="out")

    cfg = PipelineConfig(
        seed=seed,
        data_csv=str(base / data_csv),
        columns=columns,
        log_columns=log_columns,
        demand_countries=demand_countries,
        mci_rates=mci_rates,
        gulf_countries=gulf_countries,
        trade_weights=trade_weights,
        tw_base_year=tw_base_year,
        dependent=dependent,
        longrun=longrun,
        dummies=dummies,
        adf_max_lag=adf_max_lag,
        hac_lag=hac_lag,
        chow_candidates=chow_candidates,
        bounds_p=bounds_p,
        bounds_q=bounds_q,
        bounds_case=bounds_case,
        dols_leads=dols_leads,
        dols_lags=dols_lags,
        bootstrap_reps=bootstrap_reps,
        horizon_end=horizon_end,
        holdout=holdout,
        back_transform=back_transform,
        demand=demand,
        oil=oil,
        mci=mci,
        demand_sigma=demand_sigma,
        oil_shift_high=oil_shift_high,
        mci_shift_low=mci_shift_low,
        out_dir=str(base / out_dir),
        fetch_year_range=tuple(fetch_years) if fetch_years else None,
        fetch_cache_dir=str(base / fetch_cache) if fetch_cache else None,
        source_digest=source_digest,
    )

    resolvable = cfg.resolvable_names()
    for label, name in (("variables.dependent", dependent),):
        if name not in resolvable:
            raise ConfigError(f"{label}: {name!r} is not a resolvable series")
    for i, name in enumerate(longrun):
        if name not in resolvable:
            raise ConfigError(f"variables.longrun[{i}]: {name!r} is not a resolvable series")
    for label, name in (("scenarios.demand", demand), ("scenarios.oil", oil),
                        ("scenarios.mci", mci)):
        if name is not None and name not in resolvable:
            raise ConfigError(f"{label}: {name!r} is not a resolvable series")
    if demand is not None and demand not in longrun:
        raise ConfigError("scenarios.demand: must be one of variables.longrun")
    return cfg


def load_config(path) -> PipelineConfig:
    """Read and validate a YAML config file.

    Relative data and output paths are resolved against the file's
    directory; the file's sha256 is recorded for run provenance.
    """
    p = Path(path)
    try:
        blob = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        tree = yaml.safe_load(blob.decode("utf-8"))
    except (UnicodeDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"config {p} is not valid YAML: {exc}") from exc
    digest = hashlib.sha256(blob).hexdigest()
    return parse_config(tree, base_dir=p.parent, source_digest=digest)
