"""Shared fixtures and the ``--runslow`` switch."""

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from src.config.run_config import (  # noqa: E402
    CompoundGaussian,
    NetArchitecture,
    RunConfig,
    ScenarioConfig,
    load_run_config,
)
from src.flow.flow_net import FlowBatch, init_params  # noqa: E402
from src.scenario.rng import stream  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow Monte Carlo tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo or acceptance run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_scenario():
    return ScenarioConfig(n_pulses=4, rho=0.5, seed=7)


@pytest.fixture
def compound_scenario():
    return ScenarioConfig(n_pulses=4, rho=0.5, seed=7, clutter_kind=CompoundGaussian(mu=1.0))


@pytest.fixture
def default_scenario():
    return ScenarioConfig()


@pytest.fixture
def tiny_arch():
    return NetArchitecture(data_dim=8, hidden_dims=[6, 5])


@pytest.fixture
def tiny_params(tiny_arch):
    return init_params(tiny_arch, stream(3, "fixture-init"))


@pytest.fixture
def tiny_batch():
    g = np.random.default_rng(99)
    return FlowBatch(g.standard_normal((5, 8)), g.standard_normal((5, 8)), g.uniform(0, 1, 5))


@pytest.fixture
def small_run_config(tmp_path) -> RunConfig:
    """Four-pulse run that trains and evaluates in seconds."""
    return load_run_config(
        None,
        {
            "scenario.n_pulses": 4,
            "scenario.seed": 11,
            "train.epochs": 2,
            "train.batch_size": 64,
            "arch.hidden_dims": [16, 16],
            "integration.steps": 4,
            "splits.train": 300,
            "splits.val": 400,
            "splits.test": 200,
            "evaluation.snr_min_db": 0.0,
            "evaluation.snr_max_db": 10.0,
            "evaluation.snr_step_db": 5.0,
            "evaluation.trials": 50,
            "evaluation.bench_samples": 20,
            "evaluation.bench_snr_min_db": 0.0,
            "evaluation.bench_snr_max_db": 1.0,
            "evaluation.doppler_bins": [0.0, 1.0],
            "paths.data_dir": str(tmp_path / "data"),
            "paths.checkpoint_dir": str(tmp_path / "checkpoints"),
            "paths.out_dir": str(tmp_path / "results"),
        },
    )
