import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config.run_config import NetArchitecture, TrainConfig
from src.errors import ArchitectureMismatch, DimensionMismatch, DomainError, EmptyInput
from src.flow.flow_net import (
    AdamState,
    FlowBatch,
    MlpParams,
    adam_step,
    forward,
    gradients,
    init_params,
    interpolate,
    loss_and_gradients,
    moving_average,
    rfm_loss,
    train,
)
from src.scenario.rng import stream


class TestArchitecture:
    def test_layer_dims(self):
        arch = NetArchitecture(data_dim=32, hidden_dims=[256, 256])
        assert arch.layer_dims == [(33, 256), (256, 256), (256, 32)]

    def test_odd_dim_rejected(self):
        with pytest.raises(ValueError):
            NetArchitecture(data_dim=7)


class TestParams:
    def test_init_shapes(self, tiny_arch, tiny_params):
        assert tiny_params.matches(tiny_arch)
        assert tiny_params.weights[0].shape == (6, 9)
        assert all(np.all(b == 0) for b in tiny_params.biases)

    def test_he_scale(self):
        arch = NetArchitecture(data_dim=32, hidden_dims=[512])
        params = init_params(arch, np.random.default_rng(0))
        assert params.weights[0].std() == pytest.approx(np.sqrt(2 / 33), rel=0.05)

    def test_flat_roundtrip(self, tiny_arch, tiny_params):
        rebuilt = MlpParams.from_flat(tiny_arch, tiny_params.flat())
        assert rebuilt.digest() == tiny_params.digest()

    def test_from_flat_size_check(self, tiny_arch):
        with pytest.raises(ArchitectureMismatch):
            MlpParams.from_flat(tiny_arch, np.zeros(3))

    def test_mismatched_layers(self):
        with pytest.raises(DimensionMismatch):
            MlpParams((np.zeros((3, 2)), np.zeros((2, 4))), (np.zeros(3), np.zeros(2)))


class TestInterpolate:
    def test_endpoints(self, rng):
        x0, x1 = rng.standard_normal((2, 4, 6))
        assert_allclose(interpolate(x0, x1, 0.0), x0)
        assert_allclose(interpolate(x0, x1, 1.0), x1)

    def test_per_row_times(self, rng):
        x0, x1 = rng.standard_normal((2, 3, 2))
        t = np.array([0.0, 0.5, 1.0])
        out = interpolate(x0, x1, t)
        assert_allclose(out[1], 0.5 * (x0[1] + x1[1]))

    def test_time_domain(self):
        with pytest.raises(DomainError):
            interpolate(np.zeros(2), np.zeros(2), 1.5)


class TestForward:
    def test_single_and_batch_agree(self, tiny_params, rng):
        x = rng.standard_normal((3, 8))
        batch = forward(tiny_params, x, 0.3)
        assert_allclose(forward(tiny_params, x[1], 0.3), batch[1])

    def test_zero_params_give_zero_velocity(self, tiny_arch):
        out = forward(MlpParams.zeros(tiny_arch), np.ones(8), 0.5)
        assert_allclose(out, np.zeros(8))

    def test_width_mismatch(self, tiny_params):
        with pytest.raises(DimensionMismatch):
            forward(tiny_params, np.zeros(6), 0.5)


class TestLossAndGradients:
    def test_loss_with_zero_net(self, tiny_arch, tiny_batch):
        expected = np.mean(np.sum((tiny_batch.x1 - tiny_batch.x0) ** 2, axis=1))
        assert rfm_loss(MlpParams.zeros(tiny_arch), tiny_batch) == pytest.approx(expected)

    def test_loss_and_gradients_consistent(self, tiny_params, tiny_batch):
        loss, _ = loss_and_gradients(tiny_params, tiny_batch)
        assert loss == pytest.approx(rfm_loss(tiny_params, tiny_batch))

    def test_finite_differences(self, tiny_arch, tiny_params, tiny_batch):
        grads = gradients(tiny_params, tiny_batch).flat()
        flat = tiny_params.flat()
        h = 1e-6
        picked = np.random.default_rng(0).choice(flat.size, 40, replace=False)
        for i in picked:
            up, down = flat.copy(), flat.copy()
            up[i] += h
            down[i] -= h
            numeric = (
                rfm_loss(MlpParams.from_flat(tiny_arch, up), tiny_batch)
                - rfm_loss(MlpParams.from_flat(tiny_arch, down), tiny_batch)
            ) / (2 * h)
            assert numeric == pytest.approx(grads[i], rel=1e-5, abs=1e-7)

    def test_empty_batch(self):
        with pytest.raises(EmptyInput):
            FlowBatch(np.zeros((0, 4)), np.zeros((0, 4)), np.zeros(0))

    def test_duplicated_batch_same_gradients(self, tiny_params, tiny_batch):
        doubled = FlowBatch(
            np.vstack([tiny_batch.x0, tiny_batch.x0]),
            np.vstack([tiny_batch.x1, tiny_batch.x1]),
            np.concatenate([tiny_batch.t, tiny_batch.t]),
        )
        assert_allclose(gradients(tiny_params, doubled).flat(), gradients(tiny_params, tiny_batch).flat(), rtol=1e-10,
                        atol=1e-12)

    def test_zero_data_targets_negative_latent(self, tiny_arch, rng):
        x0 = rng.standard_normal((4, 8))
        batch = FlowBatch(x0, np.zeros_like(x0), rng.uniform(0, 1, 4))
        assert_allclose(batch.target, -x0)
        assert rfm_loss(MlpParams.zeros(tiny_arch), batch) == pytest.approx(np.mean(np.sum(x0**2, axis=1)))


class TestAdam:
    def test_first_step_moves_by_learning_rate(self, tiny_params, tiny_batch):
        grads = gradients(tiny_params, tiny_batch)
        new, state = adam_step(tiny_params, grads, AdamState.fresh(tiny_params), 1e-3)
        delta = new.flat() - tiny_params.flat()
        moved = np.abs(grads.flat()) > 1e-4
        assert_allclose(np.abs(delta[moved]), 1e-3, rtol=1e-3)
        assert state.step == 1

    def test_inputs_untouched(self, tiny_params, tiny_batch):
        before = tiny_params.digest()
        adam_step(tiny_params, gradients(tiny_params, tiny_batch), AdamState.fresh(tiny_params), 1e-2)
        assert tiny_params.digest() == before

    def test_zero_gradient_leaves_params(self, tiny_params):
        new, state = adam_step(tiny_params, tiny_params.map(np.zeros_like), AdamState.fresh(tiny_params), 1e-2)
        assert_allclose(new.flat(), tiny_params.flat(), rtol=0, atol=0)
        assert state.step == 1


class TestTrain:
    def test_loss_decreases(self, tiny_arch):
        x = stream(0, "toy").standard_normal((256, 8)) * 0.3 + 2.0
        _, report = train(x, tiny_arch, TrainConfig(epochs=15, batch_size=32, learning_rate=1e-2), progress=False)
        assert len(report.epoch_losses) == 15
        assert report.final_loss < report.epoch_losses[0]
        assert report.probe_loss_final < report.probe_loss_initial
        assert len(report.moving_average) == 15

    def test_held_out_batch_loss_at_least_halves(self, tiny_arch):
        x = stream(2, "toy").standard_normal((256, 8)) * 0.3 + 2.0
        _, report = train(x, tiny_arch, TrainConfig(epochs=30, batch_size=32, learning_rate=3e-2), progress=False)
        assert report.probe_loss_final <= 0.5 * report.probe_loss_initial

    def test_deterministic(self, tiny_arch):
        x = stream(1, "toy").standard_normal((100, 8))
        cfg = TrainConfig(epochs=2, batch_size=30)
        a, ra = train(x, tiny_arch, cfg, progress=False)
        b, rb = train(x, tiny_arch, cfg, progress=False)
        assert a.digest() == b.digest()
        assert ra.epoch_losses == rb.epoch_losses

    def test_dimension_mismatch(self, tiny_arch):
        with pytest.raises(DimensionMismatch):
            train(np.zeros((10, 6)), tiny_arch, TrainConfig(epochs=1), progress=False)

    def test_empty(self, tiny_arch):
        with pytest.raises(EmptyInput):
            train(np.zeros((0, 8)), tiny_arch, TrainConfig(epochs=1), progress=False)


def test_moving_average():
    assert moving_average([1.0, 3.0, 5.0], window=2) == [1.0, 2.0, 4.0]


def test_non_finite_params_rejected(tiny_arch):
    flat = np.zeros(MlpParams.zeros(tiny_arch).flat().size)
    flat[3] = np.inf
    with pytest.raises(DomainError):
        MlpParams.from_flat(tiny_arch, flat)
