import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from spillkit.cli.main import app
from spillkit.cli.manifest import MANIFEST_NAME
from spillkit.panel.dataset import ingest_csv

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def read_manifest(out_dir):
    return json.loads((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


class TestSimulate:
    def test_writes_panels(self, run_config, out_dir):
        result = invoke("simulate", "-c", run_config)
        assert result.exit_code == 0, result.output
        returns = pd.read_csv(out_dir / "simulated_returns.csv", index_col=0)
        assert returns.shape == (400, 3)
        assert list(returns.columns) == ["s1", "s2", "s3"]
        prices = ingest_csv(out_dir / "simulated_prices.csv")
        assert prices.prices.shape == (401, 3)
        manifest = read_manifest(out_dir)
        assert manifest["status"] == "ok"
        assert manifest["notes"]["seed"] == 11
        assert [a["path"] for a in manifest["artifacts"]] == [
            "simulated_prices.csv",
            "simulated_returns.csv",
        ]

    def test_seed_and_length_override(self, run_config, out_dir, tmp_path):
        invoke("simulate", "-c", run_config)
        result = invoke("simulate", "-c", run_config, "--seed", 12, "--length", 50, "--out", tmp_path / "other")
        assert result.exit_code == 0, result.output
        other = pd.read_csv(tmp_path / "other" / "simulated_returns.csv", index_col=0)
        first = pd.read_csv(out_dir / "simulated_returns.csv", index_col=0)
        assert len(other) == 50
        assert not other.iloc[:50].equals(first.iloc[:50])
        assert read_manifest(tmp_path / "other")["notes"]["seed"] == 12

    def test_same_seed_same_bytes(self, run_config, out_dir, tmp_path):
        invoke("simulate", "-c", run_config)
        invoke("simulate", "-c", run_config, "--out", tmp_path / "again")
        for name in ("simulated_returns.csv", "simulated_prices.csv"):
            assert (out_dir / name).read_bytes() == (tmp_path / "again" / name).read_bytes()

    def test_no_simulate_section(self, make_run_config, out_dir):
        result = invoke("simulate", "-c", make_run_config(simulate=None))
        assert result.exit_code == 1
        assert "no simulate section" in result.output
        assert read_manifest(out_dir)["status"] == "failed"


class TestDiagnose:
    def test_table_and_lag_order(self, run_config, out_dir):
        result = invoke("diagnose", "-c", run_config)
        assert result.exit_code == 0, result.output
        table = pd.read_csv(out_dir / "diagnostics.csv", index_col=0)
        assert list(table.index) == ["s1", "s2", "s3"]
        assert {"mean", "sd", "jb", "jb_p", "adf", "adf_p"} <= set(table.columns)
        lags = read_manifest(out_dir)["notes"]["bic_lag_order"]
        assert 1 <= lags <= 4


class TestStatic:
    def test_tables_per_level(self, run_config, out_dir):
        result = invoke("static", "-c", run_config)
        assert result.exit_code == 0, result.output
        for label in ("mean", "q0.5", "q0.05"):
            table = pd.read_csv(out_dir / f"{label}_table.csv", index_col=0)
            assert list(table.index) == ["s1", "s2", "s3", "TO", "NET", "DOM"]
            assert list(table.columns) == ["s1", "s2", "s3", "FROM"]
            body = table.loc[["s1", "s2", "s3"], ["s1", "s2", "s3"]]
            assert body.sum(axis=1).to_numpy() == pytest.approx(100.0, abs=0.2)
        manifest = read_manifest(out_dir)
        assert set(manifest["notes"]["tci"]) == {"mean", "q0.5", "q0.05"}
        assert manifest["exit_code"] == 0

    def test_driver_transmits(self, run_config, out_dir):
        invoke("static", "-c", run_config)
        table = pd.read_csv(out_dir / "mean_table.csv", index_col=0)
        assert table.loc["NET", "s1"] > 0
        assert table.loc["DOM", "s1"] == 2

    def test_tci_in_to_row(self, run_config, out_dir):
        invoke("static", "-c", run_config, "--full-precision")
        table = pd.read_csv(out_dir / "mean_table.csv", index_col=0)
        tci = read_manifest(out_dir)["notes"]["tci"]["mean"]
        assert table.loc["TO", "FROM"] == pytest.approx(tci, rel=1e-12)
        assert pd.isna(table.loc["NET", "FROM"])

    def test_quantile_override(self, run_config, out_dir):
        result = invoke("static", "-c", run_config, "--quantiles", "0.25")
        assert result.exit_code == 0, result.output
        assert (out_dir / "q0.25_table.csv").exists()
        assert not (out_dir / "q0.05_table.csv").exists()

    def test_bad_quantiles(self, run_config):
        result = invoke("static", "-c", run_config, "--quantiles", "low,high")
        assert result.exit_code == 1
        assert "[ERROR] config" in result.output

    def test_config_error(self, make_run_config):
        result = invoke("static", "-c", make_run_config(horizon=0))
        assert result.exit_code == 1

    def test_horizon_without_terms(self, make_run_config):
        result = invoke("static", "-c", make_run_config(horizon=1, fevd_sum_from=1))
        assert result.exit_code == 1
        assert "fevd_sum_from" in result.output

    def test_missing_input(self, make_run_config, tmp_path, out_dir):
        result = invoke("static", "-c", make_run_config(input=str(tmp_path / "absent.csv")))
        assert result.exit_code == 1
        manifest = read_manifest(out_dir)
        assert manifest["status"] == "failed"
        assert manifest["errors"][0].startswith("input:")
        assert manifest["input_sha256"] is None

    def test_no_input_no_simulate(self, make_run_config):
        result = invoke("static", "-c", make_run_config(input=None, simulate=None))
        assert result.exit_code == 1
        assert "simulate section" in result.output

    def test_simulated_input(self, make_run_config, out_dir):
        result = invoke("static", "-c", make_run_config(input=None))
        assert result.exit_code == 0, result.output
        assert read_manifest(out_dir)["input"] is None

    def test_reproducible(self, run_config, out_dir, tmp_path):
        invoke("static", "-c", run_config)
        invoke("static", "-c", run_config, "--out", tmp_path / "again")
        first = read_manifest(out_dir)["artifacts"]
        second = read_manifest(tmp_path / "again")["artifacts"]
        assert first == second


class TestDynamic:
    def test_series_per_level(self, run_config, out_dir, driver_panel):
        result = invoke("dynamic", "-c", run_config)
        assert result.exit_code == 0, result.output
        mean = json.loads((out_dir / "mean_dynamic.json").read_text(encoding="utf-8"))
        assert set(mean) >= {"dates", "labels", "horizon", "tci", "to", "from", "net"}
        assert len(mean["tci"]) == len(mean["dates"]) == driver_panel.n_obs - 100
        quantile = json.loads((out_dir / "q0.05_dynamic.json").read_text(encoding="utf-8"))
        assert len(quantile["dates"]) == (600 - 150) // 25 + 1
        assert quantile["dates"][-1] == f"{driver_panel.dates[-1]:%Y-%m-%d}"
        assert read_manifest(out_dir)["notes"]["skipped_dates"] == {}

    def test_robustness_and_dump(self, run_config, out_dir):
        result = invoke("dynamic", "-c", run_config, "--robustness", "--dump-fevd", "--quantiles", "0.5")
        assert result.exit_code == 0, result.output
        for name in ("mean_dynamic_h10.json", "q0.5_dynamic_h10.json", "mean_fevd.json", "q0.5_fevd.json"):
            assert (out_dir / name).exists()
        correlations = read_manifest(out_dir)["notes"]["robustness_tci_correlation"]
        assert set(correlations) == {"mean", "q0.5"}
        assert "TCI correlation" in result.output

    def test_partial_failure(self, run_config, out_dir):
        result = invoke("dynamic", "-c", run_config, "--window", 1000)
        assert result.exit_code == 3
        manifest = read_manifest(out_dir)
        assert manifest["status"] == "partial"
        assert len(manifest["errors"]) == 2
        assert (out_dir / "mean_dynamic.json").exists()

    def test_every_level_fails(self, make_run_config, out_dir):
        result = invoke("dynamic", "-c", make_run_config(include_mean=False), "--window", 1000)
        assert result.exit_code == 2
        assert read_manifest(out_dir)["status"] == "failed"


class TestNetwork:
    def test_graphs_per_level(self, run_config, out_dir):
        result = invoke("network", "-c", run_config)
        assert result.exit_code == 0, result.output
        for label in ("mean", "q0.5", "q0.05"):
            for kind in ("correlation", "net", "mst"):
                for fmt in ("json", "graphml", "dot"):
                    assert (out_dir / f"{label}_{kind}.{fmt}").exists()
        tree = json.loads((out_dir / "mean_mst.json").read_text(encoding="utf-8"))
        assert tree["kind"] == "spanning_tree"
        assert len(tree["edges"]) == 2
        notes = read_manifest(out_dir)["notes"]["mst"]
        assert notes["mean"]["tiers"]["s1"] == 1

    def test_threshold_above_100_empties_net(self, run_config, out_dir):
        result = invoke("network", "-c", run_config, "--threshold", 101, "--quantiles", "0.5")
        assert result.exit_code == 0, result.output
        net = json.loads((out_dir / "mean_net.json").read_text(encoding="utf-8"))
        assert net["edges"] == []
        assert len(net["nodes"]) == 3

    def test_requested_date(self, run_config, out_dir, driver_panel):
        date = f"{driver_panel.dates[-1]:%Y-%m-%d}"
        result = invoke("network", "-c", run_config, "--dates", date, "--quantiles", "0.5")
        assert result.exit_code == 0, result.output
        assert (out_dir / f"mean_{date}_mst.json").exists()
        assert (out_dir / f"q0.5_{date}_net.graphml").exists()

    def test_invalid_date(self, run_config):
        result = invoke("network", "-c", run_config, "--dates", "not-a-date")
        assert result.exit_code == 1
        assert "--dates" in result.output

    def test_deterministic(self, run_config, out_dir, tmp_path):
        invoke("network", "-c", run_config, "--quantiles", "0.5")
        invoke("network", "-c", run_config, "--quantiles", "0.5", "--out", tmp_path / "again")
        assert read_manifest(out_dir)["artifacts"] == read_manifest(tmp_path / "again")["artifacts"]
