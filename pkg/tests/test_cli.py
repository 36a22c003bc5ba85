import csv
import json

import pytest

import cli_radar
from src.config import settings
from src.detectors.classical_detectors import mf_threshold_analytic
from src.detectors.drfm_detector import Threshold, scenario_digest
from src.flow.checkpoint import load_checkpoint


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    monkeypatch.setattr(settings, "redis_host", "")
    monkeypatch.setattr(settings, "out_dir_override", None)
    monkeypatch.setattr(settings, "debug_mode", False)


@pytest.fixture
def config_file(small_run_config, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(small_run_config.model_dump(mode="json")))
    return path


@pytest.fixture
def pipeline_run(config_file, small_run_config, tmp_path):
    assert cli_radar.main(["pipeline", "--config", str(config_file)]) == 0
    return small_run_config, tmp_path


class TestPipeline:
    def test_writes_artifacts(self, pipeline_run):
        config, root = pipeline_run
        assert (root / "data" / "gaussian" / "train.rfd").exists()
        assert (root / "data" / "gaussian" / "secondary.meta.json").exists()
        checkpoint = load_checkpoint(root / "checkpoints" / "drfm_gaussian.rfn")
        threshold = Threshold.from_header(checkpoint.threshold)
        assert threshold.calibration_size == 400
        assert threshold.scenario_digest is not None

        out = root / "results" / "gaussian"
        curves = read_csv(out / "pd_curve.csv")
        assert {row["detector"] for row in curves} == set(config.evaluation.detectors)
        assert all(row["scenario"] == "cGN+AWGN" for row in curves)
        assert len(curves) == 6 * 3
        assert (out / "pfa.csv").exists() and (out / "summary.txt").exists()
        assert (out / "pd_curve_cgn_awgn.svg").exists()
        diagnostics = json.loads((out / "latent_diagnostics.json").read_text())
        assert diagnostics["samples"] == 400

    def test_mf_threshold_in_band(self, pipeline_run):
        _, root = pipeline_run
        rows = {row["detector"]: row for row in read_csv(root / "results" / "gaussian" / "thresholds.csv")}
        assert float(rows["MF"]["lambda"]) == pytest.approx(mf_threshold_analytic(0.01), abs=1.5)
        assert float(rows["MF"]["analytic_lambda"]) == pytest.approx(mf_threshold_analytic(0.01))
        assert rows["D-RFM"]["analytic_lambda"] == ""

    def test_followup_stages(self, pipeline_run, config_file):
        _, root = pipeline_run
        assert cli_radar.main(["doppler", "--config", str(config_file), "--detectors", "MF,D-RFM"]) == 0
        maps = read_csv(root / "results" / "gaussian" / "doppler_map.csv")
        assert len(maps) == 2 * 2 * 3
        assert cli_radar.main(["bench", "--config", str(config_file), "--detectors", "MF,ANMF-SCM"]) == 0
        bench = read_csv(root / "results" / "gaussian" / "bench.csv")
        assert [(r["detector"], r["mode"]) for r in bench] == [
            ("MF", "fixed"), ("ANMF-SCM", "amortized"), ("ANMF-SCM", "per_sample")
        ]

    def test_evaluate_is_repeatable(self, pipeline_run, config_file):
        _, root = pipeline_run
        first = (root / "results" / "gaussian" / "pd_curve.csv").read_bytes()
        assert cli_radar.main(["evaluate", "--config", str(config_file)]) == 0
        assert (root / "results" / "gaussian" / "pd_curve.csv").read_bytes() == first

    def test_thresholds_carry_scenario_digest(self, pipeline_run):
        config, root = pipeline_run
        rows = read_csv(root / "results" / "gaussian" / "thresholds.csv")
        assert {row["scenario_digest"] for row in rows} == {scenario_digest(config.scenario)}

    def test_thresholds_for_other_pfa_rejected(self, pipeline_run, config_file, tmp_path):
        data = json.loads(config_file.read_text())
        data["evaluation"]["pfa"] = 0.05
        other = tmp_path / "other_pfa.json"
        other.write_text(json.dumps(data))
        assert cli_radar.main(["evaluate", "--config", str(other)]) == 2

    def test_thresholds_for_other_scenario_rejected(self, pipeline_run, config_file, capsys):
        assert cli_radar.main(["evaluate", "--config", str(config_file), "--seed", "12"]) == 2
        assert "run `calibrate` again" in capsys.readouterr().out


class TestArguments:
    def test_overrides(self):
        args = cli_radar.build_parser().parse_args(
            ["evaluate", "--seed", "5", "--scenario", "compound", "--detectors", "MF, NMF", "--fixed-secondary"]
        )
        overrides = cli_radar.overrides_from_args(args)
        assert overrides["scenario.seed"] == 5 and overrides["train.seed"] == 5
        assert overrides["scenario.clutter_kind.kind"] == "compound"
        assert overrides["evaluation.detectors"] == ["MF", "NMF"]
        assert overrides["evaluation.resample_secondary"] is False

    def test_epilog_lists_keys(self):
        assert "evaluation.tyler_max_iter" in cli_radar.config_epilog()
        assert "scenario.clutter_kind.mu" in cli_radar.config_epilog()


class TestExitCodes:
    def test_missing_input(self, config_file, capsys):
        assert cli_radar.main(["evaluate", "--config", str(config_file)]) == 4
        assert "❌" in capsys.readouterr().out

    def test_missing_training_data(self, config_file):
        assert cli_radar.main(["train", "--config", str(config_file)]) == 4

    def test_bad_config_file(self, tmp_path):
        assert cli_radar.main(["generate", "--config", str(tmp_path / "missing.json")]) == 2

    def test_invalid_value(self, config_file):
        assert cli_radar.main(["generate", "--config", str(config_file), "--trials", "0"]) == 2

    def test_bad_threads(self, config_file):
        assert cli_radar.main(["generate", "--config", str(config_file), "--threads", "0"]) == 2

    def test_empty_detector_list(self, config_file):
        assert cli_radar.main(["evaluate", "--config", str(config_file), "--detectors", ","]) == 2


@pytest.mark.slow
class TestAcceptanceDrfm:
    """Full-size D-RFM run on homogeneous Gaussian clutter."""

    def test_pd_anchors_and_pfa(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = cli_radar.main([
            "pipeline", "--detectors", "D-RFM", "--snr-min", "12", "--snr-max", "15", "--out", str(tmp_path / "out"),
        ])
        assert code == 0
        curve = {float(r["snr_db"]): float(r["pd"]) for r in read_csv(tmp_path / "out" / "gaussian" / "pd_curve.csv")}
        assert curve[12.0] == pytest.approx(0.911, abs=0.08)
        assert curve[15.0] >= 0.99
        pfa = read_csv(tmp_path / "out" / "gaussian" / "pfa.csv")[0]
        assert 0.0058 <= float(pfa["pfa_measured"]) <= 0.0142
