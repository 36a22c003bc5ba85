import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from src.config.run_config import ScenarioConfig, SnrMode, SplitCounts
from src.errors import DimensionMismatch, DomainError
from src.linalg.complex_linalg import HermitianMatrix, solve_hermitian, toeplitz_covariance
from src.scenario.generator import (
    Hypothesis,
    Observation,
    Split,
    calibrate_alpha,
    clutter_covariance,
    embed_real,
    generate_splits,
    sample_complex_gaussian,
    sample_interference,
    sample_observation,
    sample_observations,
    sample_secondary,
    sample_secondary_blocks,
    sample_texture,
    steering_vector,
    total_covariance,
    unembed_real,
)
from src.scenario.rng import stream


class TestSteeringVector:
    def test_bin_zero_is_ones(self):
        assert_allclose(steering_vector(0, 8), np.ones(8))

    def test_unit_modulus(self):
        assert_allclose(np.abs(steering_vector(2.5, 16)), np.ones(16))

    def test_periodic_in_bin(self):
        assert_allclose(steering_vector(3, 8), steering_vector(11, 8), atol=1e-12)


class TestComplexGaussian:
    def test_covariance_and_pseudo_covariance(self):
        cov = toeplitz_covariance(0.5, 4)
        z = sample_complex_gaussian(cov, np.random.default_rng(0), 100_000)
        empirical = z.T @ z.conj() / z.shape[0]
        pseudo = z.T @ z / z.shape[0]
        assert_allclose(empirical, cov.entries, atol=0.02)
        assert np.max(np.abs(pseudo)) < 0.02

    def test_single_draw_shape(self):
        z = sample_complex_gaussian(HermitianMatrix.identity(3), np.random.default_rng(0))
        assert z.shape == (3,)


class TestTexture:
    def test_unit_mean(self):
        delta = sample_texture(1.0, np.random.default_rng(0), 200_000)
        assert delta.mean() == pytest.approx(1.0, abs=0.01)
        assert np.all(delta > 0)

    def test_rejects_non_positive_shape(self):
        with pytest.raises(DomainError):
            sample_texture(0.0, np.random.default_rng(0))

    @pytest.mark.parametrize("mu", [0.5, 1.0, 4.0])
    def test_variance_is_inverse_shape(self, mu):
        delta = sample_texture(mu, stream(0, "texture", int(mu * 10)), 200_000)
        assert delta.var() == pytest.approx(1.0 / mu, rel=0.04)

    def test_unit_shape_is_unit_exponential(self):
        delta = sample_texture(1.0, stream(0, "texture-ks"), 20_000)
        assert stats.kstest(delta, "expon").pvalue > 1e-3


class TestAmplitude:
    def test_whitened_snr(self, small_scenario):
        alpha = calibrate_alpha(10.0, 0.0, 0.0, small_scenario)
        p = steering_vector(0.0, 4)
        gain = np.vdot(p, solve_hermitian(total_covariance(small_scenario), p)).real
        assert abs(alpha) ** 2 * gain == pytest.approx(10.0)

    def test_per_pulse_snr(self):
        cfg = ScenarioConfig(n_pulses=4, snr_mode=SnrMode.PER_PULSE)
        assert abs(calibrate_alpha(0.0, 0.0, 0.3, cfg)) == pytest.approx(0.5)

    def test_phase(self, small_scenario):
        alpha = calibrate_alpha(0.0, 0.0, 0.25, small_scenario)
        assert np.angle(alpha) == pytest.approx(np.pi / 2)


class TestInterference:
    @pytest.mark.parametrize("delta", [0.5, 2.0])
    def test_fixed_texture_covariance(self, compound_scenario, delta):
        z = sample_interference(compound_scenario, stream(0, "fixed-texture"), 200_000, texture=delta)
        empirical = z.T @ z.conj() / z.shape[0]
        expected = delta * clutter_covariance(compound_scenario).entries + compound_scenario.noise_power * np.eye(4)
        assert_allclose(empirical, expected, atol=0.04)

    def test_fixed_texture_needs_compound(self, small_scenario):
        with pytest.raises(DomainError):
            sample_interference(small_scenario, stream(0, "x"), 3, texture=1.0)

    def test_texture_must_be_positive(self, compound_scenario):
        with pytest.raises(DomainError):
            sample_interference(compound_scenario, stream(0, "x"), 3, texture=0.0)


class TestObservations:
    def test_h0_mean_power(self, small_scenario):
        y, phases = sample_observations(Hypothesis.H0, 0.0, 0.0, small_scenario, np.random.default_rng(1), 50_000)
        assert np.mean(np.abs(y) ** 2) == pytest.approx(2.0, rel=0.03)
        assert np.all(np.isnan(phases))

    def test_compound_mean_power_matches_gaussian(self, compound_scenario):
        y, _ = sample_observations(Hypothesis.H0, 0.0, 0.0, compound_scenario, np.random.default_rng(1), 100_000)
        assert np.mean(np.abs(y) ** 2) == pytest.approx(2.0, rel=0.04)

    def test_h1_adds_signal(self, small_scenario):
        alpha = 3.0 + 0j
        rng_a, rng_b = stream(0, "obs"), stream(0, "obs")
        y0, _ = sample_observations(Hypothesis.H0, 0.0, 1.0, small_scenario, rng_a, 5)
        y1, _ = sample_observations(Hypothesis.H1, 0.0, 1.0, small_scenario, rng_b, 5, alpha=alpha)
        assert_allclose(y1 - y0, np.tile(alpha * steering_vector(1.0, 4), (5, 1)), atol=1e-12)

    def test_single_observation_labels(self, small_scenario):
        obs = sample_observation(Hypothesis.H1, 5.0, 2.0, small_scenario, np.random.default_rng(0), phi=0.1)
        assert obs.snr_db == 5.0 and obs.doppler_bin == 2.0 and obs.phase == pytest.approx(0.1)
        h0 = sample_observation(Hypothesis.H0, 5.0, 2.0, small_scenario, np.random.default_rng(0))
        assert h0.snr_db is None

    def test_h1_label_required(self):
        with pytest.raises(DomainError):
            Observation(y=np.zeros(2), hypothesis=Hypothesis.H1)


class TestEmbedding:
    def test_roundtrip_and_layout(self):
        y = np.array([1 + 2j, 3 - 4j])
        x = embed_real(y)
        assert_allclose(x, [1, 3, 2, -4])
        assert_allclose(unembed_real(x), y)

    def test_odd_length_rejected(self):
        with pytest.raises(DimensionMismatch):
            unembed_real(np.zeros(3))


class TestSplits:
    def test_sizes_and_disjoint_streams(self, small_scenario):
        splits = generate_splits(small_scenario, SplitCounts(train=30, val=20, test=10))
        assert [len(splits[s]) for s in (Split.TRAIN, Split.VALIDATION, Split.TEST)] == [30, 20, 10]
        assert splits[Split.TRAIN].x.shape[1] == 8
        assert not np.allclose(splits[Split.TRAIN].x[:10], splits[Split.TEST].x)

    def test_deterministic_and_thread_independent(self, small_scenario):
        counts = SplitCounts(train=2500, val=5, test=5)
        a = generate_splits(small_scenario, counts, threads=1)[Split.TRAIN].x
        b = generate_splits(small_scenario, counts, threads=4)[Split.TRAIN].x
        assert np.array_equal(a, b)

    def test_seed_changes_data(self, small_scenario):
        counts = SplitCounts(train=5, val=5, test=5)
        other = small_scenario.model_copy(update={"seed": 8})
        a = generate_splits(small_scenario, counts)[Split.TRAIN].x
        b = generate_splits(other, counts)[Split.TRAIN].x
        assert not np.allclose(a, b)


class TestSecondary:
    def test_default_k_is_2n(self, small_scenario):
        assert sample_secondary(small_scenario).k == 8

    def test_rejects_zero_k(self, small_scenario):
        with pytest.raises(DomainError):
            sample_secondary(small_scenario, k=0)

    def test_blocks_shape(self, small_scenario):
        z = sample_secondary_blocks(small_scenario, 8, 3, np.random.default_rng(0))
        assert z.shape == (3, 8, 4)
