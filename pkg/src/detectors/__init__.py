from .classical_detectors import (
    CovEstimate,
    DetectorStatistic,
    Estimator,
    amf_scm,
    anmf_fp,
    anmf_scm,
    mf_pd_analytic,
    mf_statistic,
    mf_threshold_analytic,
    nmf_statistic,
    nmf_threshold_analytic,
    scm,
    tyler_fp,
)
from .drfm_detector import (
    DrfmDetector,
    Threshold,
    ThresholdSource,
    anomaly_score,
    calibrate_threshold,
    detect,
    inverse_map,
    latent_diagnostics,
)

__all__ = [
    "CovEstimate",
    "DetectorStatistic",
    "DrfmDetector",
    "Estimator",
    "Threshold",
    "ThresholdSource",
    "amf_scm",
    "anmf_fp",
    "anmf_scm",
    "anomaly_score",
    "calibrate_threshold",
    "detect",
    "inverse_map",
    "latent_diagnostics",
    "mf_pd_analytic",
    "mf_statistic",
    "mf_threshold_analytic",
    "nmf_statistic",
    "nmf_threshold_analytic",
    "scm",
    "tyler_fp",
]
