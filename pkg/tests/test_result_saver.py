import csv
import io
import json

import numpy as np
import pytest

from src.detectors.drfm_detector import Threshold
from src.errors import MissingInput
from src.harness.bench import AMORTIZED, FIXED, BenchEntry, BenchResult
from src.harness.evaluation import DopplerMap, PdCurve, PfaMeasurement
from src.harness.plot_formatter import PlotFormatter
from src.harness.reference_curves import reference_pd
from src.harness.result_saver import (
    BENCH_COLUMNS,
    PD_CURVE_COLUMNS,
    ResultSaver,
    export_results,
    matrix_to_csv,
    parse_pd_curves,
    pd_curves_to_csv,
    reference_gap_to_csv,
)
from src.linalg.complex_linalg import HermitianMatrix


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def curves():
    return [
        PdCurve("MF", "cGN+AWGN", 0.0, [0.0, 10.0], [0.1, 0.9], 100, [0.05, 0.04]),
        PdCurve("NMF", "cGN+AWGN", 0.0, [0.0, 10.0], [0.05, 0.7], 100, [0.04, 0.08]),
    ]


@pytest.fixture
def bench_result():
    entries = [
        BenchEntry("MF", FIXED, [0.01, 0.03], 100, None),
        BenchEntry("ANMF-FP", AMORTIZED, [0.2, 0.2], 100, 1.9255),
    ]
    return BenchResult(entries, [0.0, 1.0], 0.0, {"workers": "1"})


class TestPdCurveCsv:
    def test_columns_and_rows(self, curves):
        parsed = rows(pd_curves_to_csv(curves))
        assert list(parsed[0].keys()) == PD_CURVE_COLUMNS
        assert len(parsed) == 4
        assert parsed[1]["pd"] == "0.9"
        assert parsed[1]["trials"] == "100"

    def test_parse_back(self, curves):
        restored = parse_pd_curves(pd_curves_to_csv(curves))
        assert [c.detector for c in restored] == ["MF", "NMF"]
        assert restored[0].pd == [0.1, 0.9]
        assert restored[1].wilson_ci_halfwidth == [0.04, 0.08]

    def test_reference_gap(self, curves):
        parsed = rows(reference_gap_to_csv(curves))
        first = parsed[0]
        expected = reference_pd("cGN+AWGN", "MF", 0.0)
        assert float(first["pd_reference"]) == expected
        assert float(first["gap"]) == pytest.approx(0.1 - expected)

    def test_reference_gap_skips_unknown(self):
        curve = PdCurve("D-RFM", "custom", 0.0, [0.5], [0.3], 10, [0.1])
        assert rows(reference_gap_to_csv([curve])) == []


class TestResultSaver:
    def test_thresholds_roundtrip(self, tmp_path):
        saver = ResultSaver(tmp_path)
        thresholds = {
            "MF": Threshold(4.6, 0.01, 10000, scenario_digest="3f9a0c21d4e8b761"),
            "NMF": Threshold(0.78, 0.01, 10000),
        }
        saver.save_thresholds(thresholds, "cGN+AWGN", {"MF": 4.605, "NMF": None})
        loaded = saver.load_thresholds()
        assert loaded == thresholds
        table = rows((tmp_path / "thresholds.csv").read_text())
        assert table[1]["analytic_lambda"] == ""
        assert table[0]["scenario_digest"] == "3f9a0c21d4e8b761"
        assert table[1]["scenario_digest"] == ""

    def test_load_missing(self, tmp_path):
        with pytest.raises(MissingInput):
            ResultSaver(tmp_path).load_thresholds()

    def test_bench_and_context(self, tmp_path, bench_result):
        paths = ResultSaver(tmp_path).save_bench(bench_result)
        table = rows(open(paths["bench"]).read())
        assert list(table[0].keys()) == BENCH_COLUMNS
        assert float(table[0]["mean_ms"]) == pytest.approx(0.02)
        assert table[0]["reference_ms_from_paper"] == ""
        context = json.loads(open(paths["context"]).read())
        assert context["snr_list_db"] == [0.0, 1.0]
        assert context["workers"] == "1"

    def test_pfa(self, tmp_path):
        path = ResultSaver(tmp_path).save_pfa([PfaMeasurement("MF", "cGN+AWGN", 0.01, 0.0098, 5000)])
        assert rows(open(path).read())[0]["pfa_measured"] == "0.0098"

    def test_matrix_debug(self, tmp_path):
        m = HermitianMatrix(np.array([[2.0, 1j], [-1j, 3.0]]))
        path = ResultSaver(tmp_path).save_matrix_debug("sigma", m)
        assert path.endswith("debug_sigma.csv")
        table = rows(open(path).read())
        assert table[0]["re_1"] == "0.0" and table[0]["im_1"] == "1.0"
        assert list(rows(matrix_to_csv(np.eye(3)))[0].keys()) == ["re_0", "im_0", "re_1", "im_1", "re_2", "im_2"]


class TestExport:
    def test_writes_every_artifact(self, tmp_path, curves, bench_result):
        doppler = DopplerMap("MF", "cGN+AWGN", [0.0, 1.0], [0.0, 10.0], np.array([[0.1, 0.9], [0.2, 0.8]]), 50)
        pfa = [PfaMeasurement("MF", "cGN+AWGN", 0.01, 0.011, 1000)]
        paths = export_results(tmp_path, curves, [doppler], bench_result, pfa)
        for key in ("pd_curve", "pd_reference_gap", "doppler_map", "bench", "context", "pfa", "summary"):
            assert key in paths
        assert "pd_curve_cgn_awgn.svg" in paths
        assert "doppler_map_mf_cgn_awgn.svg" in paths
        assert (tmp_path / "pd_curve_cgn_awgn.svg").read_text().lstrip().startswith("<?xml")
        assert len(rows((tmp_path / "doppler_map.csv").read_text())) == 4

    def test_reexport_identical(self, tmp_path, curves):
        export_results(tmp_path / "a", curves)
        export_results(tmp_path / "b", curves)
        for name in ("pd_curve.csv", "pd_curve_cgn_awgn.svg", "summary.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_no_svg(self, tmp_path, curves):
        paths = export_results(tmp_path, curves, emit_svg=False)
        assert not any(k.endswith(".svg") for k in paths)


class TestSummary:
    def test_sections(self, curves, bench_result):
        text = PlotFormatter.format_summary(curves, [PfaMeasurement("MF", "cGN+AWGN", 0.01, 0.01, 100)], bench_result)
        assert "RADAR DETECTION RESULTS" in text
        assert "## FALSE ALARM RATE" in text
        assert "Pd >= 0.5 from 10 dB" in text
        assert "(published 1.9255 ms)" in text

    def test_never_crosses(self):
        curve = PdCurve("NMF", "cGN+AWGN", 0.0, [0.0], [0.2], 10, [0.1])
        assert "never reaches 0.5" in PlotFormatter.format_summary([curve])
