import csv
import json

import numpy as np
import pytest

from theftsentry.cli import load_ranking_csv, main

SMALL = {
    "generator": {"n_consumers": 10, "m_days": 6, "intervals": 24, "seed": 3, "noise_sigma": 0.35},
    "scenario": {"areas": 2, "thieves_per_area": 2, "fdi_mix": "mix", "seed": 5},
    "evaluate": {"map_n": 5, "trials": 2, "master_seed": 1},
}


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def run(*argv):
    return main(list(argv))


class TestSynth:
    def test_writes_expected_rows(self, tmp_path, config_path, capsys):
        out = tmp_path / "out"
        assert run("synth", "--config", config_path, "--out-dir", str(out)) == 0
        rows = list(csv.reader(open(out / "consumers.csv")))
        assert rows[0][:2] == ["consumer_id", "day"]
        assert len(rows) == 1 + 10 * 6
        assert len(rows[0]) == 2 + 24
        assert (out / "observer.csv").exists()

    def test_rerun_is_byte_identical(self, tmp_path, config_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run("synth", "--config", config_path, "--out-dir", str(a))
        run("synth", "--config", config_path, "--out-dir", str(b))
        assert (a / "consumers.csv").read_bytes() == (b / "consumers.csv").read_bytes()
        assert (a / "observer.csv").read_bytes() == (b / "observer.csv").read_bytes()

    def test_zero_consumers_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"generator": {"n_consumers": 0}}))
        assert run("synth", "--config", str(cfg), "--out-dir", str(tmp_path / "o")) == 2

    def test_default_scale_row_count(self, tmp_path):
        out = tmp_path / "out"
        assert run("synth", "--out-dir", str(out)) == 0  # built-in defaults
        with open(out / "consumers.csv") as fh:
            n_rows = sum(1 for _ in fh) - 1
        assert n_rows == 391 * 30


class TestTamper:
    def test_outputs_and_labels(self, tmp_path, config_path):
        out = tmp_path / "out"
        assert run("tamper", "--config", config_path, "--out-dir", str(out)) == 0
        scenario = json.loads((out / "scenario.json").read_text())
        fraud = [cid for area in scenario["fraud_ids"] for cid in area]
        assert len(fraud) == 4  # 2 areas x 2 thieves
        assert len(scenario["areas"]) == 2
        assert (out / "observer_00.csv").exists() and (out / "observer_01.csv").exists()
        # every thief tampers floor(m/2) days
        for cid in fraud:
            assert len(scenario["tampered_days"][cid]) == 3

    def test_single_type_mix(self, tmp_path, config_path):
        out = tmp_path / "out"
        cfg = json.loads(open(config_path).read())
        cfg["scenario"]["fdi_mix"] = "FDI1"
        p = tmp_path / "cfg1.json"
        p.write_text(json.dumps(cfg))
        run("tamper", "--config", str(p), "--out-dir", str(out))
        scenario = json.loads((out / "scenario.json").read_text())
        assert set(scenario["fdi_types"].values()) == {"FDI1"}
        for per_day in scenario["records"].values():
            assert all(rec["type"] == "FDI1" for rec in per_day.values())


class TestDetect:
    def test_end_to_end_with_scenario(self, tmp_path, config_path):
        out = tmp_path / "out"
        run("tamper", "--config", config_path, "--out-dir", str(out))
        cfg = json.loads(open(config_path).read())
        cfg["paths"] = {
            "consumers": str(out / "consumers.csv"),
            "observer": str(out / "observer_*.csv"),
            "scenario": str(out / "scenario.json"),
            "out_dir": str(out),
        }
        p = tmp_path / "cfg2.json"
        p.write_text(json.dumps(cfg))
        assert run("detect", "--config", str(p)) == 0
        header = open(out / "ranking.csv").readline().strip()
        assert header == (
            "consumer_id,mic_degree,mic_rank,zeta_degree,zeta_rank,"
            "combined_arith,combined_geo"
        )

    def test_observer_count_must_match_areas(self, tmp_path, config_path):
        out = tmp_path / "out"
        run("tamper", "--config", config_path, "--out-dir", str(out))
        cfg = json.loads(open(config_path).read())
        cfg["paths"] = {
            "consumers": str(out / "consumers.csv"),
            "observer": str(out / "observer_00.csv"),  # one file for two areas
            "scenario": str(out / "scenario.json"),
            "out_dir": str(out),
        }
        p = tmp_path / "cfg_obs.json"
        p.write_text(json.dumps(cfg))
        assert run("detect", "--config", str(p)) == 2

    def test_derive_without_truth_is_config_error(self, tmp_path, config_path):
        out = tmp_path / "out"
        run("tamper", "--config", config_path, "--out-dir", str(out))
        cfg = json.loads(open(config_path).read())
        cfg["paths"] = {
            "consumers": str(out / "consumers.csv"),
            "observer": "derive",
            "out_dir": str(out),
        }
        p = tmp_path / "cfg3.json"
        p.write_text(json.dumps(cfg))
        assert run("detect", "--config", str(p)) == 2

    def test_derive_with_truth_runs(self, tmp_path, config_path):
        out = tmp_path / "out"
        run("tamper", "--config", config_path, "--out-dir", str(out))
        cfg = json.loads(open(config_path).read())
        cfg["paths"] = {
            "consumers": str(out / "consumers.csv"),
            "observer": "derive",
            "ground_truth": str(out / "ground_truth.csv"),
            "scenario": str(out / "scenario.json"),
            "out_dir": str(out),
        }
        p = tmp_path / "cfg4.json"
        p.write_text(json.dumps(cfg))
        assert run("detect", "--config", str(p), "--methods", "mic") == 0
        header = open(out / "ranking.csv").readline().strip()
        assert header == "consumer_id,mic_degree,mic_rank"

    def test_missing_consumers_is_config_error(self, config_path, tmp_path):
        assert run("detect", "--config", config_path, "--out-dir", str(tmp_path)) == 2

    def test_malformed_csv_is_data_error(self, tmp_path, config_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("consumer_id,day,v1,v2\na,0,1,x\n")
        obs = tmp_path / "obs.csv"
        obs.write_text("day,v1,v2\n0,1,1\n")
        assert (
            run(
                "detect",
                "--config", config_path,
                "--out-dir", str(tmp_path),
                "--consumers", str(bad),
                "--observer", str(obs),
            )
            == 3
        )


class TestEvaluateCmd:
    def test_full_cycle_metrics(self, tmp_path, config_path):
        out = tmp_path / "out"
        run("tamper", "--config", config_path, "--out-dir", str(out))
        cfg = json.loads(open(config_path).read())
        cfg["paths"] = {
            "consumers": str(out / "consumers.csv"),
            "observer": str(out / "observer_*.csv"),
            "scenario": str(out / "scenario.json"),
            "out_dir": str(out),
        }
        p = tmp_path / "cfg5.json"
        p.write_text(json.dumps(cfg))
        run("detect", "--config", str(p))
        assert run("evaluate", "--config", str(p)) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {"mic", "cfsfdp", "arith", "geo"}
        for vals in metrics.values():
            assert 0.0 <= vals["auc"] <= 1.0
            assert 0.0 <= vals["map@5"] <= 1.0

    def test_perfect_ranking_fixture(self, tmp_path):
        ranking = tmp_path / "ranking.csv"
        with open(ranking, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["consumer_id", "mic_degree", "mic_rank"])
            for i in range(5):
                w.writerow([f"c{i}", repr(0.1 * (i + 1)), repr(float(i + 1))])
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            json.dumps(
                {
                    "seed": 0,
                    "areas": [[f"c{i}" for i in range(5)]],
                    "fraud_ids": [["c3", "c4"]],
                    "fdi_types": {},
                    "tampered_days": {},
                    "records": {},
                }
            )
        )
        assert (
            run(
                "evaluate",
                "--ranking", str(ranking),
                "--scenario", str(scenario),
                "--out-dir", str(tmp_path),
            )
            == 0
        )
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["mic"]["auc"] == pytest.approx(1.0)

    def test_needs_scenario(self, tmp_path, config_path):
        assert run("evaluate", "--config", config_path, "--out-dir", str(tmp_path)) == 2


class TestExperimentCmd:
    def test_smoke_run_writes_reports(self, tmp_path, config_path):
        out = tmp_path / "out"
        assert (
            run(
                "experiment",
                "--config", config_path,
                "--out-dir", str(out),
                "--trials", "2",
                "--threads", "1",
                "--methods", "mic,cfsfdp,arith",
            )
            == 0
        )
        report = json.loads((out / "report.json").read_text())
        assert report["trials"] == 2
        assert set(report["methods"]) == {"mic", "cfsfdp", "arith"}
        header = open(out / "report.csv").readline().strip()
        assert header == "fdi,auc_mic,auc_cfsfdp,auc_arith,map5_mic,map5_cfsfdp,map5_arith"
        curves = (out / "curves.csv").read_text().splitlines()
        assert len(curves) == 1 + 2 * 3

    def test_rerun_byte_identical(self, tmp_path, config_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["experiment", "--config", config_path, "--trials", "2", "--threads", "1"]
        run(*args, "--out-dir", str(a))
        run(*args, "--out-dir", str(b))
        assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
        assert (a / "curves.csv").read_bytes() == (b / "curves.csv").read_bytes()


class TestMicCmd:
    def test_two_column_csv(self, tmp_path, capsys):
        p = tmp_path / "pairs.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            for i in range(48):
                w.writerow([i, i * i])
        assert run("mic", str(p)) == 0
        out = capsys.readouterr().out
        assert out.startswith("mic ")
        assert float(out.split()[1]) == pytest.approx(1.0, abs=1e-9)

    def test_bad_pair_is_data_error(self, tmp_path):
        p = tmp_path / "pairs.csv"
        p.write_text("x,y\n1,2\n3\n")
        assert run("mic", str(p)) == 3


class TestConfig:
    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"generater": {}}))
        assert run("synth", "--config", str(p), "--out-dir", str(tmp_path)) == 2

    def test_invalid_json_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text("{not json")
        assert run("synth", "--config", str(p), "--out-dir", str(tmp_path)) == 2

    def test_missing_config_rejected(self, tmp_path):
        assert run("synth", "--config", str(tmp_path / "nope.json"),
                   "--out-dir", str(tmp_path)) == 2


def test_load_ranking_csv_round_trip(tmp_path, small_scenario):
    from theftsentry.pipeline import detect

    areas, _ = small_scenario
    res = detect(areas, ["mic", "cfsfdp", "arith", "geo"])
    p = tmp_path / "ranking.csv"
    res.to_csv(p)
    back = load_ranking_csv(p)
    assert set(back) == {"mic", "cfsfdp", "arith", "geo"}
    assert np.array_equal(back["mic"].ranks, res.rankings["mic"].ranks)
    assert back["mic"].consumer_ids == res.consumer_ids