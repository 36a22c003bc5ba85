"""Uniform detector handles for calibration, sweeps and timing.

A handle turns a batch of complex observations (M, N) and a steering vector
into one statistic per observation. Adaptive handles also own their
secondary-data policy: a fixed block shared by every trial, or a fresh block
per trial drawn from the caller's stream.
"""

import dataclasses
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.config.run_config import DETECTOR_NAMES, RunConfig, ScenarioConfig
from src.detectors.classical_detectors import (
    TYLER_MAX_ITER,
    TYLER_TOL,
    mf_statistics,
    nmf_statistics,
    scm_batch,
    tyler_fp_batch,
)
from src.detectors.drfm_detector import DrfmDetector, Threshold
from src.errors import DomainError, MissingInput
from src.linalg.complex_linalg import HermitianMatrix
from src.scenario.generator import (
    SecondaryData,
    embed_real,
    sample_secondary_blocks,
    total_covariance,
)

logger = logging.getLogger(__name__)

ADAPTIVE = ("AMF-SCM", "ANMF-SCM", "ANMF-FP")


@dataclasses.dataclass(frozen=True, eq=False)
class DetectorHandle:
    """Named detector with its fixed inputs and, once calibrated, a threshold."""

    name: str
    threshold: Optional[Threshold] = None

    @property
    def is_adaptive(self) -> bool:
        return False

    def draw_secondary(self, count: int, rng: Optional[np.random.Generator]) -> Optional[np.ndarray]:
        """Per-trial secondary blocks, or None when the handle needs none."""
        return None

    def statistics(self, y: np.ndarray, p: np.ndarray, secondary: Optional[np.ndarray] = None) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, y: np.ndarray, p: np.ndarray, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Draw whatever secondary data the handle needs, then score ``y``."""
        y = np.atleast_2d(y)
        return self.statistics(y, p, self.draw_secondary(y.shape[0], rng))

    def decide(self, y: np.ndarray, p: np.ndarray, secondary: Optional[np.ndarray] = None) -> np.ndarray:
        if self.threshold is None:
            raise MissingInput(f"{self.name} has no calibrated threshold; run `calibrate` first")
        return self.threshold.exceeds(self.statistics(np.atleast_2d(y), p, secondary))

    def with_threshold(self, threshold: Threshold) -> "DetectorHandle":
        return dataclasses.replace(self, threshold=threshold)


@dataclasses.dataclass(frozen=True, eq=False)
class KnownCovarianceHandle(DetectorHandle):
    """MF / NMF oracles built on the true clutter-plus-noise covariance."""

    sigma: Optional[HermitianMatrix] = None

    def statistics(self, y, p, secondary=None):
        if self.name == "MF":
            return mf_statistics(y, p, self.sigma)
        return nmf_statistics(y, p, self.sigma)


@dataclasses.dataclass(frozen=True, eq=False)
class AdaptiveHandle(DetectorHandle):
    """AMF-SCM, ANMF-SCM or ANMF-FP fed by secondary data."""

    scenario: Optional[ScenarioConfig] = None
    k: int = 32
    resample: bool = True
    fixed_secondary: Optional[np.ndarray] = None
    tyler_tol: float = TYLER_TOL
    tyler_max_iter: int = TYLER_MAX_ITER

    @property
    def is_adaptive(self) -> bool:
        return True

    @property
    def normalized(self) -> bool:
        return self.name != "AMF-SCM"

    def draw_secondary(self, count, rng):
        if not self.resample:
            return None
        if rng is None:
            raise DomainError(f"{self.name} resamples secondary data and needs a random stream")
        return sample_secondary_blocks(self.scenario, self.k, count, rng)

    def estimate(self, z: np.ndarray) -> np.ndarray:
        """Covariance estimates for a (B, K, N) stack of secondary blocks."""
        if self.name == "ANMF-FP":
            return tyler_fp_batch(z, self.tyler_tol, self.tyler_max_iter)[0]
        return scm_batch(z)

    def statistics(self, y, p, secondary=None):
        if secondary is None:
            if self.fixed_secondary is None:
                raise MissingInput(f"{self.name} has no secondary data")
            secondary = self.fixed_secondary
        secondary = np.asarray(secondary)
        if secondary.ndim == 2:
            cov = self.estimate(secondary[None])[0]
        else:
            cov = self.estimate(secondary)
        if self.normalized:
            return nmf_statistics(y, p, cov)
        return mf_statistics(y, p, cov)


@dataclasses.dataclass(frozen=True, eq=False)
class FlowHandle(DetectorHandle):
    """D-RFM: latent anomaly score of the real-embedded observation."""

    detector: Optional[DrfmDetector] = None

    def statistics(self, y, p, secondary=None):
        return self.detector.scores(embed_real(y))


def build_handles(
    config: RunConfig,
    names: Optional[Sequence[str]] = None,
    drfm: Optional[DrfmDetector] = None,
    secondary: Optional[SecondaryData] = None,
    resample: Optional[bool] = None,
) -> List[DetectorHandle]:
    """Construct handles for ``names`` (default: every configured detector).

    Args:
        config: Run configuration (scenario, K, Tyler settings).
        names: Detector subset in output order.
        drfm: Trained detector; required when D-RFM is requested.
        secondary: Shared block for non-resampling adaptive handles.
        resample: Override of ``evaluation.resample_secondary``.

    Raises:
        MissingInput: D-RFM requested without a trained detector, or a
            fixed-block adaptive handle without secondary data.
    """
    names = list(names or config.evaluation.detectors)
    resample = config.evaluation.resample_secondary if resample is None else resample
    handles: List[DetectorHandle] = []
    for name in names:
        if name not in DETECTOR_NAMES:
            raise DomainError(f"unknown detector {name!r}")
        if name in ("MF", "NMF"):
            handles.append(KnownCovarianceHandle(name=name, sigma=total_covariance(config.scenario)))
        elif name in ADAPTIVE:
            if not resample and secondary is None:
                raise MissingInput(f"{name} needs a secondary-data block when resampling is off")
            handles.append(
                AdaptiveHandle(
                    name=name,
                    scenario=config.scenario,
                    k=config.k_secondary,
                    resample=resample,
                    fixed_secondary=None if secondary is None else secondary.z,
                    tyler_tol=config.evaluation.tyler_tol,
                    tyler_max_iter=config.evaluation.tyler_max_iter,
                )
            )
        else:
            if drfm is None:
                raise MissingInput("D-RFM requested but no trained checkpoint was provided")
            handles.append(FlowHandle(name=name, detector=drfm, threshold=drfm.threshold))
    logger.debug("Built handles: %s", ", ".join(h.name for h in handles))
    return handles


def attach_thresholds(handles: Sequence[DetectorHandle], thresholds: Dict[str, Threshold]) -> List[DetectorHandle]:
    """Return handles carrying their calibrated thresholds.

    Raises:
        MissingInput: some handle has no threshold.
    """
    out = []
    for handle in handles:
        if handle.name not in thresholds:
            raise MissingInput(f"no threshold for {handle.name}; run `calibrate` first")
        out.append(handle.with_threshold(thresholds[handle.name]))
    return out
