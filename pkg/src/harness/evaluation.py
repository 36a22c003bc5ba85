"""Monte Carlo evaluation: threshold calibration, Pfa checks, Pd sweeps, Doppler maps.

Random draws come from keyed streams addressed by stage and grid point, so
calibration, Pfa and sweep samples never overlap, and parallel or sequential
execution gives the same counts. Every detector in a sweep sees the same H1
observations and secondary blocks.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats
from tqdm import tqdm

from src.config.run_config import ScenarioConfig
from src.detectors.drfm_detector import Threshold, calibrate_threshold
from src.errors import EmptyInput, NotConverged
from src.harness.handles import DetectorHandle
from src.scenario.generator import Hypothesis, sample_observations, steering_vector
from src.scenario.rng import stream

logger = logging.getLogger(__name__)

TRIAL_CHUNK = 1000


@dataclass
class PdCurve:
    detector: str
    scenario: str
    doppler_bin: float
    snr_grid_db: List[float]
    pd: List[float]
    trials_per_point: int
    wilson_ci_halfwidth: List[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.pd) != len(self.snr_grid_db):
            raise ValueError("pd and snr grid lengths differ")
        if any(not 0.0 <= v <= 1.0 for v in self.pd):
            raise ValueError("pd values must lie in [0, 1]")

    def pd_at(self, snr_db: float) -> float:
        return self.pd[self.snr_grid_db.index(snr_db)]


@dataclass
class DopplerMap:
    detector: str
    scenario: str
    doppler_bins: List[float]
    snr_grid_db: List[float]
    pd: np.ndarray
    trials_per_point: int

    def __post_init__(self):
        self.pd = np.asarray(self.pd, dtype=np.float64)
        if self.pd.shape != (len(self.doppler_bins), len(self.snr_grid_db)):
            raise ValueError(f"map shape {self.pd.shape} does not match bins x snr grid")

    def row(self, d: float) -> List[float]:
        return self.pd[self.doppler_bins.index(d)].tolist()


@dataclass
class PfaMeasurement:
    detector: str
    scenario: str
    pfa_target: float
    pfa_measured: float
    test_size: int


def wilson_halfwidth(successes: int, trials: int, confidence: float = 0.95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return float("nan")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    return float(z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    """``(low, high)`` Wilson score interval."""
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / trials
    center = (phat + z * z / (2 * trials)) / (1.0 + z * z / trials)
    half = wilson_halfwidth(successes, trials, confidence)
    return center - half, center + half


def _chunked_statistics(
    handle: DetectorHandle, y: np.ndarray, p: np.ndarray, seed: int, purpose: str
) -> np.ndarray:
    parts = []
    for index, start in enumerate(range(0, y.shape[0], TRIAL_CHUNK)):
        rows = y[start : start + TRIAL_CHUNK]
        try:
            parts.append(handle.evaluate(rows, p, stream(seed, purpose, index)))
        except NotConverged as e:
            if e.trial is not None:
                e.trial += start
            logger.warning("%s: Tyler iteration failed at trial %s (%s)", handle.name, e.trial, purpose)
            raise
    return np.concatenate(parts)


def calibrate_all(
    handles: Sequence[DetectorHandle],
    h0_validation: np.ndarray,
    pfa: float,
    cfg: ScenarioConfig,
    d: float = 0.0,
) -> Dict[str, Threshold]:
    """Empirical CFAR threshold for every handle from its own H0 statistics.

    Args:
        handles: Detectors to calibrate.
        h0_validation: Complex (M, N) target-free observations.
        pfa: Target false-alarm probability.
        cfg: Scenario (seed for secondary-data streams).
        d: Doppler bin of the steering vector used while calibrating.

    Raises:
        EmptyInput: empty validation set.
    """
    y = np.atleast_2d(np.asarray(h0_validation))
    if y.shape[0] == 0:
        raise EmptyInput("validation set is empty")
    p = steering_vector(d, cfg.n_pulses)
    thresholds = {}
    for handle in handles:
        values = _chunked_statistics(handle, y, p, cfg.seed, f"calibrate-secondary:{handle.name}")
        thresholds[handle.name] = calibrate_threshold(values, pfa)
        logger.info("Calibrated %s: lambda=%.6g on %d samples", handle.name, thresholds[handle.name].lam, y.shape[0])
    return thresholds


def measure_pfa(
    handle: DetectorHandle,
    threshold: Threshold,
    h0_test: np.ndarray,
    cfg: ScenarioConfig,
    d: float = 0.0,
) -> float:
    """Fraction of target-free test observations declared H1."""
    y = np.atleast_2d(np.asarray(h0_test))
    if y.shape[0] == 0:
        return float("nan")
    p = steering_vector(d, cfg.n_pulses)
    values = _chunked_statistics(handle, y, p, cfg.seed, f"pfa-secondary:{handle.name}")
    return float(np.mean(threshold.exceeds(values)))


def _detections_at(handle: DetectorHandle, snr_db: float, d: float, trials: int, cfg: ScenarioConfig) -> int:
    p = steering_vector(d, cfg.n_pulses)
    hits = 0
    for index, start in enumerate(range(0, trials, TRIAL_CHUNK)):
        count = min(TRIAL_CHUNK, trials - start)
        y, _ = sample_observations(
            Hypothesis.H1, snr_db, d, cfg, stream(cfg.seed, f"pd-obs:{d!r}:{snr_db!r}", index), count
        )
        secondary = handle.draw_secondary(count, stream(cfg.seed, f"pd-secondary:{d!r}:{snr_db!r}", index))
        try:
            hits += int(np.count_nonzero(handle.decide(y, p, secondary)))
        except NotConverged as e:
            if e.trial is not None:
                e.trial += start
            logger.warning(
                "%s: Tyler iteration failed at SNR %.1f dB, bin %g, trial %s", handle.name, snr_db, d, e.trial
            )
            raise
    return hits


def pd_sweep(
    handle: DetectorHandle,
    snr_grid_db: Sequence[float],
    d: float,
    trials: int,
    cfg: ScenarioConfig,
    threads: Optional[int] = None,
    progress: Optional[bool] = False,
) -> PdCurve:
    """Detection rate per SNR point from fresh H1 trials, with Wilson 95% half-widths."""
    grid = [float(s) for s in snr_grid_db]

    def run(snr_db: float) -> int:
        return _detections_at(handle, snr_db, d, trials, cfg)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(run, grid)
        hits = list(
            tqdm(results, total=len(grid), desc=f"{handle.name} d={d:g}", unit="snr",
                 disable=None if progress is None else not progress)
        )
    return PdCurve(
        detector=handle.name,
        scenario=cfg.label,
        doppler_bin=float(d),
        snr_grid_db=grid,
        pd=[h / trials for h in hits],
        trials_per_point=trials,
        wilson_ci_halfwidth=[wilson_halfwidth(h, trials) for h in hits],
    )


def doppler_map(
    handle: DetectorHandle,
    snr_grid_db: Sequence[float],
    cfg: ScenarioConfig,
    trials: int,
    doppler_bins: Optional[Sequence[float]] = None,
    threads: Optional[int] = None,
    progress: Optional[bool] = None,
) -> DopplerMap:
    """Pd over Doppler bins (default 0..N-1) by SNR."""
    bins = [float(d) for d in (doppler_bins if doppler_bins is not None else range(cfg.n_pulses))]
    rows = []
    for d in tqdm(bins, desc=f"{handle.name} doppler", unit="bin", disable=None if progress is None else not progress):
        rows.append(pd_sweep(handle, snr_grid_db, d, trials, cfg, threads=threads).pd)
    return DopplerMap(
        detector=handle.name,
        scenario=cfg.label,
        doppler_bins=bins,
        snr_grid_db=[float(s) for s in snr_grid_db],
        pd=np.asarray(rows),
        trials_per_point=trials,
    )
