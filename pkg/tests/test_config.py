"""Config parsing: strict schema, defaults, referential checks, file loading."""

import hashlib
import math

import pytest

from cointkit.config import (
    DEFAULT_MCI_SHIFT,
    DEFAULT_OIL_SHIFT,
    PipelineConfig,
    load_config,
    parse_config,
)
from cointkit.errors import ConfigError


def base_tree():
    return {
        "seed": 7,
        "data": {
            "csv": "data.csv",
            "columns": ["remit", "gdp_a", "gdp_b", "rate_x", "rate_y", "oil", "infl"],
        },
        "transforms": {"log": ["remit", "oil", "gdp_a", "gdp_b"]},
        "indices": {
            "external_demand": ["ln_gdp_a", "ln_gdp_b"],
            "mci": ["rate_x", "rate_y"],
        },
        "variables": {
            "dependent": "ln_remit",
            "longrun": ["ext_demand", "ln_oil", "mci", "infl"],
        },
        "dummies": {"d2002": 2002},
        "tests": {"chow_candidates": [2002, 2008]},
        "forecast": {"horizon_end": 2030},
        "scenarios": {"demand": "ext_demand", "oil": "ln_oil", "mci": "mci"},
        "output": {"dir": "out"},
    }


class TestValidConfig:
    def test_parses_and_applies_defaults(self):
        cfg = parse_config(base_tree(), base_dir="/work")
        assert cfg.seed == 7, f"seed {cfg.seed}"
        assert cfg.bounds_p == 2 and cfg.bounds_q == 2 and cfg.bounds_case == 3
        assert cfg.dols_leads == 1 and cfg.dols_lags == 1
        assert cfg.bootstrap_reps == 999
        assert cfg.holdout == 5
        assert cfg.back_transform == "exp"
        assert cfg.tw_base_year == 2010
        assert cfg.demand_sigma == 1.0
        assert cfg.oil_shift_high == DEFAULT_OIL_SHIFT == pytest.approx(math.log(0.9))
        assert cfg.mci_shift_low == DEFAULT_MCI_SHIFT == 0.5
        assert cfg.adf_max_lag is None and cfg.hac_lag is None

    def test_paths_resolved_against_base_dir(self):
        cfg = parse_config(base_tree(), base_dir="/work")
        assert cfg.data_csv == "/work/data.csv", f"data_csv {cfg.data_csv}"
        assert cfg.out_dir == "/work/out", f"out_dir {cfg.out_dir}"

    def test_resolvable_names(self):
        cfg = parse_config(base_tree())
        names = cfg.resolvable_names()
        assert "remit" in names and "ln_remit" in names
        assert "ext_demand" in names and "mci" in names
        assert "ln_infl" not in names, "only logged columns gain ln_ aliases"

    def test_model_names_order(self):
        cfg = parse_config(base_tree())
        assert cfg.model_names() == ("ln_remit", "ext_demand", "ln_oil", "mci", "infl")

    def test_dummies_preserve_order(self):
        tree = base_tree()
        tree["dummies"] = {"d2002": 2002, "d2020": 2020}
        cfg = parse_config(tree)
        assert cfg.dummies == (("d2002", 2002), ("d2020", 2020))

    def test_explicit_test_settings(self):
        tree = base_tree()
        tree["tests"].update({
            "adf_max_lag": 3,
            "hac_lag": 2,
            "bounds": {"p": 3, "q": 1, "case": 3},
            "dols": {"leads": 2, "lags": 0},
            "bootstrap_reps": 250,
        })
        cfg = parse_config(tree)
        assert cfg.adf_max_lag == 3 and cfg.hac_lag == 2
        assert (cfg.bounds_p, cfg.bounds_q) == (3, 1)
        assert (cfg.dols_leads, cfg.dols_lags) == (2, 0)
        assert cfg.bootstrap_reps == 250

    def test_index_variants(self):
        tree = base_tree()
        tree["indices"]["gulf"] = ["ln_gdp_a"]
        tree["indices"]["trade_weights"] = {"gdp_a": 0.6, "gdp_b": 0.4}
        tree["indices"]["base_year"] = 2015
        cfg = parse_config(tree)
        assert cfg.gulf_countries == ("ln_gdp_a",)
        assert cfg.trade_weights == (("gdp_a", 0.6), ("gdp_b", 0.4))
        assert cfg.tw_base_year == 2015

    def test_fetch_block(self):
        tree = base_tree()
        tree["data"]["fetch"] = {"years": [1993, 2024], "cache_dir": "cache"}
        cfg = parse_config(tree, base_dir="/work")
        assert cfg.fetch_year_range == (1993, 2024)
        assert cfg.fetch_cache_dir == "/work/cache"

    def test_frozen(self):
        cfg = parse_config(base_tree())
        with pytest.raises(Exception):
            cfg.seed = 8  # type: ignore[misc]


class TestSchemaErrors:
    def test_unknown_top_level_key(self):
        tree = base_tree()
        tree["zzz"] = 1
        with pytest.raises(ConfigError, match="config.zzz: unknown key"):
            parse_config(tree)

    def test_unknown_nested_key_names_path(self):
        tree = base_tree()
        tree["tests"]["bounds"] = {"p": 2, "zzz": 1}
        with pytest.raises(ConfigError, match=r"tests\.bounds\.zzz: unknown key"):
            parse_config(tree)

    def test_missing_seed(self):
        tree = base_tree()
        del tree["seed"]
        with pytest.raises(ConfigError, match=r"config\.seed: required key missing"):
            parse_config(tree)

    def test_bool_seed_rejected(self):
        tree = base_tree()
        tree["seed"] = True
        with pytest.raises(ConfigError, match=r"config\.seed: expected an integer"):
            parse_config(tree)

    def test_missing_data_csv(self):
        tree = base_tree()
        del tree["data"]["csv"]
        with pytest.raises(ConfigError, match=r"data\.csv: required key missing"):
            parse_config(tree)

    def test_duplicate_columns(self):
        tree = base_tree()
        tree["data"]["columns"] = ["a", "b", "a"]
        with pytest.raises(ConfigError, match=r"data\.columns: duplicate"):
            parse_config(tree)

    def test_missing_dependent_before_any_computation(self):
        tree = base_tree()
        del tree["variables"]["dependent"]
        with pytest.raises(ConfigError, match=r"variables\.dependent: required key missing"):
            parse_config(tree)

    def test_list_dependent_rejected(self):
        tree = base_tree()
        tree["variables"]["dependent"] = ["ln_remit", "infl"]
        with pytest.raises(ConfigError, match="exactly one dependent"):
            parse_config(tree)

    def test_dependent_inside_longrun(self):
        tree = base_tree()
        tree["variables"]["longrun"] = ["ln_remit", "infl"]
        with pytest.raises(ConfigError, match="contains the dependent"):
            parse_config(tree)

    def test_missing_longrun(self):
        tree = base_tree()
        del tree["variables"]["longrun"]
        with pytest.raises(ConfigError, match=r"variables\.longrun: required key missing"):
            parse_config(tree)

    def test_log_of_unknown_column(self):
        tree = base_tree()
        tree["transforms"]["log"] = ["nope"]
        with pytest.raises(ConfigError, match=r"transforms\.log: 'nope'"):
            parse_config(tree)

    def test_bad_dummy_year(self):
        tree = base_tree()
        tree["dummies"] = {"d2002": "latest"}
        with pytest.raises(ConfigError, match=r"dummies\.d2002: expected a year"):
            parse_config(tree)

    def test_bootstrap_reps_minimum(self):
        tree = base_tree()
        tree["tests"]["bootstrap_reps"] = 10
        with pytest.raises(ConfigError, match="below minimum 100"):
            parse_config(tree)

    def test_bad_back_transform(self):
        tree = base_tree()
        tree["forecast"]["back_transform"] = "log"
        with pytest.raises(ConfigError, match=r"forecast\.back_transform"):
            parse_config(tree)

    def test_fetch_years_must_be_pair(self):
        tree = base_tree()
        tree["data"]["fetch"] = {"years": [1993]}
        with pytest.raises(ConfigError, match=r"data\.fetch\.years"):
            parse_config(tree)

    def test_non_mapping_top_level(self):
        with pytest.raises(ConfigError, match="config: expected a mapping"):
            parse_config(["not", "a", "mapping"])


class TestReferentialErrors:
    def test_unresolvable_dependent(self):
        tree = base_tree()
        tree["variables"]["dependent"] = "ln_ghost"
        with pytest.raises(ConfigError, match="'ln_ghost' is not a resolvable series"):
            parse_config(tree)

    def test_unresolvable_longrun_entry_names_position(self):
        tree = base_tree()
        tree["variables"]["longrun"] = ["ext_demand", "ghost"]
        with pytest.raises(ConfigError, match=r"variables\.longrun\[1\]: 'ghost'"):
            parse_config(tree)

    def test_index_input_must_be_column_or_log(self):
        tree = base_tree()
        tree["indices"]["mci"] = ["rate_x", "ghost_rate"]
        with pytest.raises(ConfigError, match="'ghost_rate' is not a resolvable column"):
            parse_config(tree)

    def test_gulf_must_be_subset_of_demand_panel(self):
        tree = base_tree()
        tree["indices"]["gulf"] = ["ln_gdp_a", "ln_oil"]
        with pytest.raises(ConfigError, match=r"indices\.gulf"):
            parse_config(tree)

    def test_negative_trade_weight(self):
        tree = base_tree()
        tree["indices"]["trade_weights"] = {"gdp_a": -0.5}
        with pytest.raises(ConfigError, match=r"trade_weights\.gdp_a"):
            parse_config(tree)

    def test_scenario_demand_must_be_longrun_member(self):
        tree = base_tree()
        tree["scenarios"]["demand"] = "infl"
        tree["variables"]["longrun"] = ["ext_demand", "ln_oil", "mci"]
        with pytest.raises(ConfigError, match=r"scenarios\.demand: must be one of"):
            parse_config(tree)

    def test_scenario_oil_must_resolve(self):
        tree = base_tree()
        tree["scenarios"]["oil"] = "ln_ghost"
        with pytest.raises(ConfigError, match=r"scenarios\.oil: 'ln_ghost'"):
            parse_config(tree)


class TestLoadConfig:
    def test_roundtrip_and_digest(self, tmp_path):
        import yaml

        blob = yaml.safe_dump(base_tree()).encode("utf-8")
        p = tmp_path / "cfg.yaml"
        p.write_bytes(blob)
        cfg = load_config(p)
        assert isinstance(cfg, PipelineConfig)
        assert cfg.source_digest == hashlib.sha256(blob).hexdigest()
        assert cfg.data_csv == str(tmp_path / "data.csv"), "paths anchor at config dir"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("seed: [unclosed", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid YAML"):
            load_config(p)

    def test_error_fires_before_data_is_touched(self, tmp_path):
        import yaml

        tree = base_tree()
        del tree["variables"]["dependent"]
        tree["data"]["csv"] = "does-not-exist.csv"
        p = tmp_path / "cfg.yaml"
        p.write_text(yaml.safe_dump(tree), encoding="utf-8")
        with pytest.raises(ConfigError, match="dependent"):
            load_config(p)
