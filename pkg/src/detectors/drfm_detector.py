"""Detection with a trained rectified flow: inverse mapping, scoring, CFAR thresholds."""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from scipy import stats

from src.config.run_config import IntegrationConfig, ScenarioConfig
from src.errors import DomainError, EmptyInput
from src.flow.flow_net import MlpParams, forward
from src.scenario.generator import Hypothesis

logger = logging.getLogger(__name__)


class ThresholdSource(str, Enum):
    EMPIRICAL_QUANTILE = "EmpiricalQuantile"
    ANALYTIC = "Analytic"


@dataclass(frozen=True)
class Threshold:
    """CFAR threshold; a statistic strictly above ``lam`` declares H1."""

    lam: float
    pfa_target: float
    calibration_size: int
    source: ThresholdSource = ThresholdSource.EMPIRICAL_QUANTILE
    scenario_digest: Optional[str] = None

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise DomainError(f"threshold must be finite, got {self.lam}")
        if not 0.0 < self.pfa_target < 1.0:
            raise DomainError(f"pfa must lie in (0, 1), got {self.pfa_target}")

    def exceeds(self, statistics: np.ndarray) -> np.ndarray:
        """Boolean H1 decisions; equality stays H0."""
        return np.asarray(statistics) > self.lam

    def to_header(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "pfa_target": self.pfa_target,
            "calibration_size": self.calibration_size,
            "source": self.source.value,
            "scenario_digest": self.scenario_digest,
        }

    @classmethod
    def from_header(cls, data: Dict[str, Any]) -> "Threshold":
        return cls(
            lam=float(data["lambda"]),
            pfa_target=float(data["pfa_target"]),
            calibration_size=int(data["calibration_size"]),
            source=ThresholdSource(data.get("source", ThresholdSource.EMPIRICAL_QUANTILE.value)),
            scenario_digest=data.get("scenario_digest"),
        )


def scenario_digest(cfg: ScenarioConfig) -> str:
    blob = json.dumps(cfg.snapshot(), sort_keys=True).encode("utf-8")
    return hashlib.blake2b(blob, digest_size=8).hexdigest()


def inverse_map(params: MlpParams, x: np.ndarray, cfg: Optional[IntegrationConfig] = None) -> np.ndarray:
    """Integrate the velocity field backwards from t=1 to t=0 with explicit Euler.

    ``u <- u - v(u, k/S) / S`` for k = S, ..., 1, starting at ``u = x``.
    Works on one vector or an (M, D) batch.
    """
    cfg = cfg or IntegrationConfig()
    u = np.array(x, dtype=np.float64, copy=True)
    h = 1.0 / cfg.steps
    for k in range(cfg.steps, 0, -1):
        u = u - h * forward(params, u, k * h)
    return u


def anomaly_score(z: np.ndarray) -> Union[float, np.ndarray]:
    """Squared Euclidean norm over the last axis."""
    z = np.asarray(z, dtype=np.float64)
    scores = np.sum(z * z, axis=-1)
    return float(scores) if np.ndim(scores) == 0 else scores


def calibrate_threshold(
    scores: Sequence[float], pfa: float, source: ThresholdSource = ThresholdSource.EMPIRICAL_QUANTILE
) -> Threshold:
    """Empirical CFAR threshold: the ``ceil((1 - pfa) M)``-th smallest score.

    Raises:
        EmptyInput: no scores.
        DomainError: pfa outside (0, 1).
    """
    values = np.sort(np.asarray(scores, dtype=np.float64).ravel())
    if values.size == 0:
        raise EmptyInput("cannot calibrate a threshold from an empty score list")
    if not 0.0 < pfa < 1.0:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")
    m = values.size
    # ceil((1 - pfa) m) without the rounding drift of 1 - pfa
    k = max(1, m - int(math.floor(pfa * m + 1e-9)))
    return Threshold(lam=float(values[k - 1]), pfa_target=pfa, calibration_size=m, source=source)


@dataclass(frozen=True, eq=False)
class DrfmDetector:
    """Trained velocity field plus its threshold and integration settings."""

    params: MlpParams
    integration: IntegrationConfig
    threshold: Optional[Threshold] = None

    def scores(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(anomaly_score(inverse_map(self.params, x, self.integration)))

    def decide(self, x: np.ndarray) -> np.ndarray:
        if self.threshold is None:
            raise DomainError("detector has no calibrated threshold")
        return self.threshold.exceeds(self.scores(x))


def detect(
    x: np.ndarray, params: MlpParams, threshold: Threshold, cfg: Optional[IntegrationConfig] = None
) -> Hypothesis:
    """Decide H1 iff the latent score strictly exceeds the threshold."""
    score = anomaly_score(inverse_map(params, np.asarray(x, dtype=np.float64), cfg))
    return Hypothesis.H1 if score > threshold.lam else Hypothesis.H0


def latent_diagnostics(z: np.ndarray) -> Dict[str, Any]:
    """Summary of how close latent vectors look to N(0, I).

    Reported only; nothing downstream depends on these numbers.
    """
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if z.shape[0] == 0:
        raise EmptyInput("no latent vectors to summarize")
    d = z.shape[1]
    scores = np.sum(z * z, axis=1)
    means = z.mean(axis=0)
    variances = z.var(axis=0)
    ks = stats.kstest(scores, "chi2", args=(d,))
    return {
        "samples": int(z.shape[0]),
        "dim": d,
        "mean_score": float(scores.mean()),
        "mean_score_over_dim": float(scores.mean() / d),
        "coord_mean_min": float(means.min()),
        "coord_mean_max": float(means.max()),
        "coord_var_min": float(variances.min()),
        "coord_var_max": float(variances.max()),
        "ks_chi2_statistic": float(ks.statistic),
        "ks_chi2_pvalue": float(ks.pvalue),
    }
