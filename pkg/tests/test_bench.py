import itertools

import pytest

from src.config.run_config import load_run_config
from src.detectors.drfm_detector import DrfmDetector, Threshold
from src.flow.flow_net import MlpParams
from src.harness.bench import AMORTIZED, FIXED, PER_SAMPLE, BenchEntry, bench, per_sample_mean_ms
from src.harness.handles import build_handles


def fake_clock(step_s: float):
    """Clock advancing ``step_s`` seconds per reading."""
    ticks = itertools.count()
    return lambda: next(ticks) * step_s


@pytest.fixture
def config():
    return load_run_config(None, {"scenario.n_pulses": 4, "arch.hidden_dims": [8], "integration.steps": 2})


@pytest.fixture
def handles(config):
    threshold = Threshold(1.0, 0.01, 10)
    drfm = DrfmDetector(MlpParams.zeros(config.arch), config.integration, threshold)
    built = build_handles(config, ["MF", "ANMF-FP", "D-RFM"], drfm=drfm)
    return [h.with_threshold(threshold) for h in built]


class TestMeanFormula:
    def test_arithmetic_identity(self):
        totals = [0.5, 1.0, 1.5]
        assert per_sample_mean_ms(totals, 1000) == pytest.approx((0.5 + 1.0 + 1.5) / 3 / 1000 * 1e3)

    def test_entry_mean(self):
        entry = BenchEntry("MF", FIXED, [1.0, 2.0, 6.0], 10)
        assert entry.mean_ms == pytest.approx(3.0)
        assert entry.snr_points == 3

    def test_entry_mean_from_totals(self):
        entry = BenchEntry("ANMF-FP", PER_SAMPLE, [0.0005, 0.0015], 1000, totals_s=[0.0005, 0.0015])
        assert entry.mean_ms == pytest.approx(per_sample_mean_ms([0.0005, 0.0015], 1000))
        assert entry.mean_ms == pytest.approx(1e-3)


class TestBench:
    def test_injected_clock(self, config, handles):
        result = bench(handles, config.scenario, n_samples=10, snr_list_db=[0.0, 5.0], clock=fake_clock(0.02),
                       warmup=False)
        # every timed region spans exactly one clock step
        for entry in result.entries:
            assert entry.per_snr_ms == pytest.approx([2.0, 2.0])
            assert entry.totals_s == pytest.approx([0.02, 0.02])
            assert entry.mean_ms == pytest.approx(per_sample_mean_ms([0.02, 0.02], 10))

    def test_modes(self, config, handles):
        result = bench(handles, config.scenario, n_samples=5, snr_list_db=[0.0], clock=fake_clock(0.01))
        modes = {(e.detector, e.mode) for e in result.entries}
        assert modes == {("MF", FIXED), ("ANMF-FP", AMORTIZED), ("ANMF-FP", PER_SAMPLE), ("D-RFM", FIXED)}

    def test_reference_column_and_context(self, config, handles):
        result = bench(handles, config.scenario, n_samples=5, snr_list_db=[0.0], clock=fake_clock(0.01))
        assert result.entry("ANMF-FP", PER_SAMPLE).reference_ms == pytest.approx(1.9255)
        assert result.entry("D-RFM").reference_ms == pytest.approx(0.0209)
        assert result.context["workers"] == "1"

    def test_default_snr_list(self, config, handles):
        result = bench(handles[:1], config.scenario, n_samples=2, clock=fake_clock(0.001), warmup=False)
        assert result.snr_list_db == [float(s) for s in range(0, 21)]
        assert result.entries[0].snr_points == 21

    def test_missing_entry(self, config, handles):
        result = bench(handles[:1], config.scenario, n_samples=2, snr_list_db=[0.0], clock=fake_clock(0.001))
        with pytest.raises(KeyError):
            result.entry("D-RFM")

    def test_real_clock_positive(self, config, handles):
        result = bench(handles, config.scenario, n_samples=20, snr_list_db=[0.0, 1.0])
        assert all(e.mean_ms > 0 for e in result.entries)
