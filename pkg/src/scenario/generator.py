"""Synthetic radar observations under H0/H1 for Gaussian and compound clutter."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.config.run_config import ScenarioConfig, SnrMode, SplitCounts
from src.errors import DimensionMismatch, DomainError
from src.linalg.complex_linalg import (
    HermitianMatrix,
    cholesky,
    sesquilinear,
    solve_hermitian,
    toeplitz_covariance,
)
from src.scenario.rng import stream

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1000


class Hypothesis(str, Enum):
    H0 = "H0"
    H1 = "H1"


class Split(IntEnum):
    TRAIN = 0
    VALIDATION = 1
    TEST = 2
    SECONDARY = 3


@dataclass(frozen=True, eq=False)
class Observation:
    """One complex pulse vector with its provenance."""

    y: np.ndarray
    hypothesis: Hypothesis
    snr_db: Optional[float] = None
    doppler_bin: Optional[float] = None
    phase: Optional[float] = None

    def __post_init__(self):
        labels = (self.snr_db, self.doppler_bin, self.phase)
        if self.hypothesis is Hypothesis.H0 and any(v is not None for v in labels):
            raise DomainError("H0 observations carry no SNR, Doppler or phase")
        if self.hypothesis is Hypothesis.H1 and any(v is None for v in labels):
            raise DomainError("H1 observations need SNR, Doppler and phase")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Real-embedded H0 samples of one split."""

    x: np.ndarray
    split: Split
    config_snapshot: ScenarioConfig
    creation_seed: int

    def __post_init__(self):
        x = np.asarray(self.x)
        if x.ndim != 2 or x.shape[1] != self.config_snapshot.data_dim:
            raise DimensionMismatch(
                f"dataset rows must have D={self.config_snapshot.data_dim} columns, got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise DomainError("dataset holds non-finite values")

    def __len__(self) -> int:
        return self.x.shape[0]

    def observations(self) -> np.ndarray:
        """Complex (M, N) view of the rows."""
        return unembed_real(self.x)


@dataclass(frozen=True, eq=False)
class SecondaryData:
    """K target-free vectors drawn under H0 of one scenario."""

    z: np.ndarray
    config_snapshot: ScenarioConfig = field(repr=False)

    @property
    def k(self) -> int:
        return self.z.shape[0]


def steering_vector(d: float, n: int) -> np.ndarray:
    """Doppler steering vector ``p_k = exp(2j*pi*d*k/n)``, k = 0..n-1."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return np.exp(2j * np.pi * d * np.arange(n) / n)


def sample_complex_gaussian(
    cov: HermitianMatrix, rng: np.random.Generator, size: Optional[int] = None
) -> np.ndarray:
    """Draw from CN(0, cov): coloring ``L u`` of circular unit-variance noise.

    Each entry of ``u`` has independent real and imaginary parts of
    variance 1/2, so ``E[z z^H] = cov`` and ``E[z z^T] = 0``.

    Returns:
        A vector of length n, or an (size, n) array when ``size`` is given.
    """
    factor = cholesky(cov).entries
    rows = 1 if size is None else int(size)
    shape = (rows, cov.n)
    u = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    z = u @ factor.T
    return z[0] if size is None else z


def sample_texture(mu: float, rng: np.random.Generator, size: Optional[int] = None):
    """Gamma(mu, 1/mu) texture with unit mean."""
    if not mu > 0:
        raise DomainError(f"texture shape mu must be positive, got {mu}")
    return rng.gamma(shape=mu, scale=1.0 / mu, size=size)


@lru_cache(maxsize=32)
def clutter_covariance(cfg: ScenarioConfig) -> HermitianMatrix:
    """Clutter covariance ``Sigma_c = T(rho)``; noise power follows from the CNR."""
    return toeplitz_covariance(cfg.rho, cfg.n_pulses)


@lru_cache(maxsize=32)
def total_covariance(cfg: ScenarioConfig) -> HermitianMatrix:
    """Clutter-plus-noise covariance ``Sigma = Sigma_c + sigma^2 I`` (unit-mean texture)."""
    return clutter_covariance(cfg) + HermitianMatrix.identity(cfg.n_pulses).scaled(cfg.noise_power)


def calibrate_alpha(snr_db: float, d: float, phi: float, cfg: ScenarioConfig) -> complex:
    """Target amplitude for a requested SNR.

    Whitened mode solves ``|alpha|^2 p^H Sigma^{-1} p = SNR``; per-pulse mode
    uses ``|alpha| = sqrt(SNR / N)``. Both carry the phase ``exp(2j*pi*phi)``.
    """
    snr = 10.0 ** (snr_db / 10.0)
    if cfg.snr_mode is SnrMode.WHITENED:
        sigma = total_covariance(cfg)
        p = steering_vector(d, cfg.n_pulses)
        gain = sesquilinear(p, HermitianMatrix.identity(cfg.n_pulses), solve_hermitian(sigma, p)).real
        magnitude = math.sqrt(snr / gain)
    else:
        magnitude = math.sqrt(snr / cfg.n_pulses)
    return complex(magnitude * np.exp(2j * np.pi * phi))


def sample_interference(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    count: int,
    texture: Optional[Union[float, np.ndarray]] = None,
) -> np.ndarray:
    """Clutter plus thermal noise ``c + n``, shape (count, N).

    Args:
        texture: Fixed texture per row (or one value for all) replacing the
            Gamma draw; compound scenarios only.
    """
    if texture is not None and not cfg.is_compound:
        raise DomainError("a fixed texture needs a compound clutter scenario")
    g = sample_complex_gaussian(clutter_covariance(cfg), rng, count)
    if cfg.is_compound:
        if texture is None:
            delta = sample_texture(cfg.clutter_kind.mu, rng, count)
        else:
            delta = np.broadcast_to(np.asarray(texture, dtype=np.float64), (count,))
            if np.any(delta <= 0):
                raise DomainError("texture values must be positive")
        g = np.sqrt(delta)[:, None] * g
    shape = (count, cfg.n_pulses)
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(
        cfg.noise_power / 2.0
    )
    return g + noise


def sample_observations(
    hyp: Hypothesis,
    snr_db: float,
    d: float,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    count: int,
    phi: Optional[float] = None,
    alpha: Optional[complex] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Batch of observations sharing (hypothesis, SNR, Doppler).

    Args:
        phi: Fixed target phase; drawn uniform on [0, 1) per row when None.
        alpha: Amplitude override (phase then ignored); mainly for tests.

    Returns:
        ``(y, phases)`` with y of shape (count, N); phases are NaN under H0.
    """
    y = sample_interference(cfg, rng, count)
    phases = np.full(count, np.nan)
    if hyp is Hypothesis.H1:
        p = steering_vector(d, cfg.n_pulses)
        phases = rng.uniform(0.0, 1.0, count) if phi is None else np.full(count, float(phi))
        if alpha is None:
            magnitude = abs(calibrate_alpha(snr_db, d, 0.0, cfg))
            amplitudes = magnitude * np.exp(2j * np.pi * phases)
        else:
            amplitudes = np.full(count, complex(alpha))
        y = y + amplitudes[:, None] * p[None, :]
    return y, phases


def sample_observation(
    hyp: Hypothesis,
    snr_db: float,
    d: float,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    phi: Optional[float] = None,
    alpha: Optional[complex] = None,
) -> Observation:
    """Single observation per ``H0: y = c + n`` / ``H1: y = alpha p + c + n``."""
    y, phases = sample_observations(hyp, snr_db, d, cfg, rng, 1, phi=phi, alpha=alpha)
    if hyp is Hypothesis.H0:
        return Observation(y=y[0], hypothesis=hyp)
    return Observation(
        y=y[0], hypothesis=hyp, snr_db=float(snr_db), doppler_bin=float(d), phase=float(phases[0])
    )


def embed_real(y: np.ndarray) -> np.ndarray:
    """``[Re(y); Im(y)]`` along the last axis."""
    y = np.asarray(y)
    return np.concatenate([y.real, y.imag], axis=-1).astype(np.float64)


def unembed_real(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_real`."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] % 2:
        raise DimensionMismatch(f"real embedding needs an even length, got {x.shape[-1]}")
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def _h0_rows(cfg: ScenarioConfig, purpose: str, count: int, threads: Optional[int] = None) -> np.ndarray:
    starts = list(range(0, count, CHUNK_SIZE))

    def chunk(index: int) -> np.ndarray:
        size = min(CHUNK_SIZE, count - starts[index])
        return sample_interference(cfg, stream(cfg.seed, purpose, index), size)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(chunk, range(len(starts))))
    return np.concatenate(parts, axis=0)


def generate_splits(
    cfg: ScenarioConfig, counts: Optional[SplitCounts] = None, threads: Optional[int] = None
) -> Dict[Split, Dataset]:
    """H0 train/validation/test datasets from disjoint keyed streams."""
    counts = counts or SplitCounts()
    sizes = {Split.TRAIN: counts.train, Split.VALIDATION: counts.val, Split.TEST: counts.test}
    datasets = {}
    for split, size in sizes.items():
        rows = _h0_rows(cfg, f"split-{split.name.lower()}", size, threads)
        datasets[split] = Dataset(
            x=embed_real(rows), split=split, config_snapshot=cfg, creation_seed=cfg.seed
        )
        logger.info("Generated %s split: %d x %d (%s)", split.name.lower(), size, cfg.data_dim, cfg.label)
    return datasets


def sample_secondary(
    cfg: ScenarioConfig, k: Optional[int] = None, rng: Optional[np.random.Generator] = None
) -> SecondaryData:
    """K independent H0 vectors (default K = 2N)."""
    k = 2 * cfg.n_pulses if k is None else int(k)
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    rng = rng if rng is not None else stream(cfg.seed, "secondary")
    return SecondaryData(z=sample_interference(cfg, rng, k), config_snapshot=cfg)


def sample_secondary_blocks(
    cfg: ScenarioConfig, k: int, blocks: int, rng: np.random.Generator
) -> np.ndarray:
    """``blocks`` independent secondary sets, shape (blocks, k, N)."""
    return sample_interference(cfg, rng, blocks * k).reshape(blocks, k, cfg.n_pulses)
