"""Shared fixtures: a synthetic cointegrated macro dataset and its config."""

import numpy as np
import pytest

from cointkit.config import parse_config

ISO = ["qat", "ind", "are", "sau", "mys", "usa", "jpn", "kwt", "bhr", "kor", "gbr", "aus"]
RATES = ["policy_rate", "interbank_rate", "tbill_rate", "deposit_rate", "lending_rate"]
GULF = ["qat", "are", "sau", "kwt", "bhr", "mys"]


def write_macro_csv(path, seed=7):
    """A 21-column, 1993-2024 panel with a known error-correction structure."""
    rng = np.random.default_rng(seed)
    years = np.arange(1993, 2025)
    n = len(years)

    demand = np.cumsum(rng.normal(0.08, 0.25, n)) + 3.0
    mci_f = np.cumsum(rng.normal(-0.05, 0.2, n)) + 5.0
    ln_oil = np.cumsum(rng.normal(0.03, 0.15, n)) + 3.2
    ln_fx = np.cumsum(rng.normal(0.0, 0.05, n)) + 1.3
    infl = 2.5 + rng.normal(0, 0.8, n)

    ect = np.zeros(n)
    lnr = np.zeros(n)
    lnr[0] = 1.2 + 0.25 * demand[0] - 0.2 * mci_f[0]
    for t in range(1, n):
        eq = 1.2 + 0.25 * demand[t - 1] - 0.2 * mci_f[t - 1]
        ect[t - 1] = lnr[t - 1] - eq
        dy = -0.3 * ect[t - 1] + 0.25 * (demand[t] - demand[t - 1]) + rng.normal(0, 0.05)
        if years[t] == 2002:
            dy += 0.9
        lnr[t] = lnr[t - 1] + dy

    cols = {"remit_gdp": np.exp(lnr)}
    for i, c in enumerate(ISO):
        load = 0.8 + 0.05 * i
        ln_gdp = 0.3 * (load * demand + rng.normal(0, 0.3, n)) + 0.2 * i + 2.0
        cols[f"gdp_{c}"] = np.exp(ln_gdp)
    for i, r in enumerate(RATES):
        load = 0.9 + 0.04 * i
        cols[r] = load * mci_f + rng.normal(0, 0.25, n) + 0.5 * i
    cols["oil"] = np.exp(ln_oil)
    cols["fx"] = np.exp(ln_fx)
    cols["inflation"] = infl

    names = list(cols)
    lines = ["year," + ",".join(names)]
    for i, yr in enumerate(years):
        lines.append(str(yr) + "," + ",".join(f"{cols[nm][i]:.6f}" for nm in names))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return names


def macro_config_tree(csv_name="data.csv"):
    return {
        "seed": 42,
        "data": {
            "csv": csv_name,
            "columns": (
                ["remit_gdp"]
                + [f"gdp_{c}" for c in ISO]
                + RATES
                + ["oil", "fx", "inflation"]
            ),
        },
        "transforms": {"log": ["remit_gdp", "oil", "fx"] + [f"gdp_{c}" for c in ISO]},
        "indices": {
            "external_demand": [f"ln_gdp_{c}" for c in ISO],
            "gulf": [f"ln_gdp_{c}" for c in GULF],
            "trade_weights": {"gdp_qat": 0.35, "gdp_ind": 0.3, "gdp_are": 0.2,
                              "gdp_sau": 0.15},
            "base_year": 2010,
            "mci": RATES,
        },
        "variables": {
            "dependent": "ln_remit_gdp",
            "longrun": ["ext_demand", "ln_oil", "ln_fx", "mci", "inflation"],
        },
        "dummies": {"d2002": 2002},
        "tests": {"chow_candidates": [2002, 2008, 2014], "bootstrap_reps": 199},
        "forecast": {"horizon_end": 2030, "holdout": 5},
        "scenarios": {"demand": "ext_demand", "oil": "ln_oil", "mci": "mci"},
        "output": {"dir": "out"},
    }


@pytest.fixture(scope="session")
def macro_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("macro")
    write_macro_csv(d / "data.csv")
    return d


@pytest.fixture(scope="session")
def macro_cfg(macro_dir):
    return parse_config(macro_config_tree(), base_dir=str(macro_dir),
                        source_digest="f" * 64)
