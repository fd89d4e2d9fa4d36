"""Command-line interface: subcommands, overrides, exit codes."""

import yaml

import numpy as np
import pytest

from cointkit import cli
from cointkit.series import series_from_values

from conftest import macro_config_tree, write_macro_csv


@pytest.fixture(scope="module")
def cli_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_macro_csv(d / "data.csv")
    (d / "cfg.yaml").write_text(yaml.safe_dump(macro_config_tree()), encoding="utf-8")
    return d


def write_tree(cli_dir, tree, name):
    p = cli_dir / name
    p.write_text(yaml.safe_dump(tree), encoding="utf-8")
    return str(p)


class TestExitCodes:
    def test_success_is_zero(self, cli_dir, capsys):
        rc = cli.main(["ecm", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(cli_dir / "o_ecm")])
        out = capsys.readouterr().out
        assert rc == 0, f"exit {rc}"
        assert "ecm            ok" in out

    def test_config_error_is_two(self, cli_dir, capsys):
        tree = macro_config_tree()
        tree["mystery"] = 1
        path = write_tree(cli_dir, tree, "bad_key.yaml")
        rc = cli.main(["run", "--config", path])
        err = capsys.readouterr().err
        assert rc == 2, f"exit {rc}"
        assert "config error" in err and "mystery" in err

    def test_missing_config_file_is_two(self, cli_dir, capsys):
        rc = cli.main(["run", "--config", str(cli_dir / "absent.yaml")])
        assert rc == 2, f"exit {rc}"
        assert "cannot read config" in capsys.readouterr().err

    def test_data_error_is_three(self, cli_dir, capsys):
        tree = macro_config_tree(csv_name="absent.csv")
        path = write_tree(cli_dir, tree, "bad_data.yaml")
        rc = cli.main(["run", "--config", path])
        assert rc == 3, f"exit {rc}"
        assert "data error" in capsys.readouterr().err

    def test_schema_mismatch_is_three(self, cli_dir, capsys):
        tree = macro_config_tree()
        tree["data"]["columns"] = tree["data"]["columns"] + ["ghost_column"]
        tree["output"]["dir"] = "o_schema"
        path = write_tree(cli_dir, tree, "bad_schema.yaml")
        rc = cli.main(["run", "--config", path])
        assert rc == 3, f"exit {rc}"
        assert "ghost_column" in capsys.readouterr().err

    def test_stage_failure_is_four(self, cli_dir, capsys):
        tree = macro_config_tree()
        tree["dummies"] = {"d1800": 1800}
        tree["output"]["dir"] = "o_fail"
        path = write_tree(cli_dir, tree, "bad_dummy.yaml")
        rc = cli.main(["run", "--config", path])
        captured = capsys.readouterr()
        assert rc == 4, f"exit {rc}"
        assert "failed stages: ecm" in captured.err
        assert "skipped" in captured.out, "dependents were skipped, not hidden"

    def test_targeted_stage_failure_is_four(self, cli_dir, capsys):
        tree = macro_config_tree()
        tree["dummies"] = {"d1800": 1800}
        tree["output"]["dir"] = "o_fail2"
        path = write_tree(cli_dir, tree, "bad_dummy2.yaml")
        rc = cli.main(["ecm", "--config", path])
        assert rc == 4, f"exit {rc}"
        assert "stage ecm failed" in capsys.readouterr().err

    def test_unknown_subcommand_exits_two(self, cli_dir):
        with pytest.raises(SystemExit) as exc:
            cli.main(["transmogrify", "--config", str(cli_dir / "cfg.yaml")])
        assert exc.value.code == 2


class TestStageCommands:
    def test_stage_command_stops_at_its_stage(self, cli_dir, capsys):
        rc = cli.main(["unitroot", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(cli_dir / "o_ur")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "unitroots      ok" in out
        assert "cointegration" not in out, "later stages must not run"
        assert (cli_dir / "o_ur" / "unitroots.csv").exists()

    def test_format_flag_limits_formats(self, cli_dir):
        out = cli_dir / "o_fmt"
        rc = cli.main(["breaks", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(out), "--format", "json"])
        assert rc == 0
        assert (out / "breaks.json").exists()
        assert not (out / "breaks.csv").exists()

    def test_seed_override_reaches_provenance(self, cli_dir):
        out = cli_dir / "o_seed"
        rc = cli.main(["estimate", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(out), "--seed", "99"])
        assert rc == 0
        summary = (out / "run_summary.txt").read_text()
        assert "seed: 99" in summary

    def test_indices_out_csv_writes_plot_file(self, cli_dir):
        target = cli_dir / "paths" / "idx.csv"
        rc = cli.main(["indices", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(target)])
        assert rc == 0
        header = target.read_text().splitlines()[0]
        assert header == "year,ext_demand_pca12,ext_demand_gulf6,ext_demand_tw,mci"

    def test_scenarios_out_csv_writes_forecast_paths(self, cli_dir):
        target = cli_dir / "paths" / "scen.csv"
        rc = cli.main(["scenarios", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(target)])
        assert rc == 0
        header = target.read_text().splitlines()[0]
        assert header == "year,actual,ets,ecm_baseline,ecm_high,ecm_low"

    def test_csv_out_rejected_for_plain_stage(self, cli_dir, capsys):
        rc = cli.main(["ecm", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(cli_dir / "nope.csv")])
        assert rc == 2, f"exit {rc}"
        assert "report directory" in capsys.readouterr().err


class TestFreeze:
    def test_freeze_writes_canonical_csv_and_manifest(self, cli_dir, capsys):
        target = cli_dir / "frozen" / "replication.csv"
        rc = cli.main(["freeze", "--config", str(cli_dir / "cfg.yaml"),
                       "--out", str(target)])
        out = capsys.readouterr().out
        assert rc == 0
        assert target.exists()
        assert (cli_dir / "frozen" / "replication.manifest.txt").exists()
        assert "dataset_sha256: " in out

    def test_freeze_is_deterministic(self, cli_dir):
        a = cli_dir / "frozen_a.csv"
        b = cli_dir / "frozen_b.csv"
        assert cli.main(["freeze", "--config", str(cli_dir / "cfg.yaml"),
                         "--out", str(a)]) == 0
        assert cli.main(["freeze", "--config", str(cli_dir / "cfg.yaml"),
                         "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestFetch:
    def test_fetch_requires_year_range(self, cli_dir, capsys):
        rc = cli.main(["fetch", "--config", str(cli_dir / "cfg.yaml")])
        assert rc == 2, f"exit {rc}"
        assert "data.fetch.years" in capsys.readouterr().err

    def test_fetch_builds_requests_and_writes_csv(self, cli_dir, monkeypatch):
        tree = macro_config_tree()
        tree["data"]["fetch"] = {"years": [1993, 2024]}
        path = write_tree(cli_dir, tree, "fetch.yaml")

        seen = {}

        def fake_fetch_many(requests, cache_dir=None):
            seen["requests"] = list(requests)
            seen["cache_dir"] = cache_dir
            out = []
            for i, req in enumerate(requests):
                y0, y1 = req.year_range
                vals = np.full(y1 - y0 + 1, float(i + 1))
                vals[0] = np.nan  # first year missing, like a real panel
                out.append(series_from_values(f"s{i}", y0, vals))
            return out

        monkeypatch.setattr(cli, "fetch_many", fake_fetch_many)
        target = cli_dir / "raw.csv"
        rc = cli.main(["fetch", "--config", path, "--out", str(target)])
        assert rc == 0, f"exit {rc}"

        reqs = seen["requests"]
        assert len(reqs) == 12 + 4, f"{len(reqs)} requests"
        country_codes = [r.country_code for r in reqs[:12]]
        assert country_codes[0] == "QAT" and "IND" in country_codes
        assert all(r.indicator_code == "NY.GDP.MKTP.KD" for r in reqs[:12])
        assert all(r.country_code == "NPL" for r in reqs[12:])
        assert {r.indicator_code for r in reqs[12:]} == {
            "BX.TRF.PWKR.DT.GD.ZS", "NY.GDP.MKTP.KD.ZG",
            "FP.CPI.TOTL.ZG", "PA.NUS.FCRF",
        }

        lines = target.read_text().splitlines()
        header = lines[0].split(",")
        assert header[0] == "year" and header[1] == "gdp_qat"
        assert "remittances_pct_gdp" in header
        assert lines[1].startswith("1993,")
        assert lines[1].split(",")[1] == "", "missing first year stays empty"
        assert len(lines) == 1 + 32
