"""Published detection-probability curves and per-sample timings.

Pd values are listed for the integer SNR grid -20..19 dB at Doppler bin 0
and Pfa = 1e-2. SVDD has reference data only; no SVDD detector is built.
"""

from typing import Dict, List, Optional, Tuple

REFERENCE_SNR_DB: List[float] = [float(s) for s in range(-20, 20)]

GAUSSIAN_LABEL = "cGN+AWGN"
COMPOUND_LABEL = "cCGN+AWGN"

_GAUSSIAN: Dict[str, List[float]] = {
    "D-RFM": [
        0.0136, 0.0144, 0.0136, 0.0122, 0.0126, 0.0134, 0.0146, 0.0148, 0.0156, 0.0176,
        0.021, 0.024, 0.027, 0.028, 0.029, 0.031, 0.032, 0.037, 0.041, 0.049,
        0.052, 0.066, 0.084, 0.108, 0.138, 0.168, 0.215, 0.285, 0.375, 0.489,
        0.629, 0.786, 0.911, 0.969, 0.998, 1.0, 1.0, 1.0, 1.0, 1.0,
    ],
    "SVDD": [
        0.0124, 0.0124, 0.0144, 0.0132, 0.0124, 0.012, 0.011, 0.012, 0.0126, 0.0108,
        0.0122, 0.012, 0.0122, 0.0116, 0.015, 0.0122, 0.0152, 0.014, 0.0152, 0.0174,
        0.018, 0.0226, 0.0264, 0.036, 0.0504, 0.0648, 0.1086, 0.1568, 0.247, 0.3684,
        0.5398, 0.718, 0.868, 0.956, 0.9916, 0.9998, 0.9998, 1.0, 1.0, 1.0,
    ],
    "MF": [
        0.0148, 0.0152, 0.0152, 0.0154, 0.0158, 0.0158, 0.0158, 0.017, 0.0174, 0.0188,
        0.0202, 0.0206, 0.0236, 0.0264, 0.0302, 0.035, 0.04, 0.0484, 0.062, 0.0752,
        0.0994, 0.1362, 0.1804, 0.235, 0.3062, 0.4032, 0.5186, 0.6502, 0.7782, 0.8824,
        0.9556, 0.9886, 0.9978, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
    ],
    "NMF": [
        0.0096, 0.0096, 0.01, 0.01, 0.0102, 0.0102, 0.0106, 0.0112, 0.0116, 0.0128,
        0.0142, 0.0148, 0.0162, 0.0182, 0.0206, 0.0244, 0.0302, 0.0344, 0.042, 0.053,
        0.0716, 0.0962, 0.1248, 0.1736, 0.2296, 0.3086, 0.4068, 0.5292, 0.6616, 0.7894,
        0.8976, 0.9642, 0.9898, 0.9996, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
    ],
    "AMF-SCM": [
        0.0082, 0.0082, 0.0084, 0.0084, 0.0084, 0.0082, 0.0086, 0.0096, 0.0102, 0.0102,
        0.0104, 0.0104, 0.011, 0.0114, 0.0116, 0.0122, 0.0134, 0.016, 0.0194, 0.0236,
        0.0302, 0.0368, 0.0494, 0.0634, 0.086, 0.1202, 0.16, 0.2174, 0.3018, 0.4132,
        0.5468, 0.6918, 0.8136, 0.9088, 0.9676, 0.9936, 0.9996, 1.0, 1.0, 1.0,
    ],
    "ANMF-FP": [
        0.0086, 0.0086, 0.0088, 0.0084, 0.0086, 0.0088, 0.009, 0.0096, 0.0094, 0.0096,
        0.01, 0.0106, 0.0106, 0.012, 0.0138, 0.0158, 0.0188, 0.0224, 0.0256, 0.0294,
        0.0378, 0.0476, 0.0618, 0.0794, 0.1068, 0.14, 0.1806, 0.2432, 0.321, 0.4202,
        0.5508, 0.6722, 0.7822, 0.8768, 0.9388, 0.9756, 0.9936, 0.999, 0.9998, 1.0,
    ],
    "ANMF-SCM": [
        0.009, 0.0088, 0.0088, 0.0086, 0.0084, 0.0086, 0.0084, 0.0086, 0.0094, 0.0096,
        0.01, 0.0102, 0.0108, 0.0126, 0.0138, 0.0158, 0.0174, 0.0202, 0.024, 0.031,
        0.038, 0.0478, 0.0612, 0.0792, 0.1048, 0.1378, 0.1822, 0.2424, 0.325, 0.426,
        0.552, 0.68, 0.7868, 0.8806, 0.9444, 0.9772, 0.9938, 0.999, 0.9998, 1.0,
    ],
}

_COMPOUND: Dict[str, List[float]] = {
    "D-RFM": [
        0.0120, 0.0126, 0.0124, 0.0152, 0.0136, 0.0122, 0.0124, 0.0138, 0.0118, 0.0116,
        0.0170, 0.0166, 0.0186, 0.0164, 0.0178, 0.0174, 0.0190, 0.0220, 0.0254, 0.0330,
        0.0320, 0.0396, 0.0494, 0.0694, 0.0946, 0.1140, 0.1688, 0.2270, 0.3156, 0.4256,
        0.5844, 0.7442, 0.8798, 0.9606, 0.9902, 0.9986, 1.0, 1.0, 1.0, 1.0,
    ],
    "SVDD": [
        0.0004, 0.0010, 0.0010, 0.0010, 0.0010, 0.0008, 0.0004, 0.0004, 0.0002, 0.0012,
        0.0004, 0.0002, 0.0018, 0.0008, 0.0010, 0.0008, 0.0002, 0.0008, 0.0008, 0.0008,
        0.0010, 0.0024, 0.0018, 0.0018, 0.0022, 0.0042, 0.0084, 0.0086, 0.0242, 0.0478,
        0.1000, 0.2124, 0.4104, 0.6520, 0.8700, 0.9752, 0.9966, 1.0, 1.0, 1.0,
    ],
    "AMF-SCM": [
        0.0138, 0.014, 0.014, 0.0142, 0.0142, 0.0142, 0.014, 0.0144, 0.0146, 0.0146,
        0.0148, 0.0154, 0.0158, 0.0158, 0.0168, 0.0184, 0.0198, 0.0214, 0.0236, 0.0254,
        0.0292, 0.0332, 0.039, 0.0464, 0.0612, 0.0796, 0.1066, 0.1428, 0.1978, 0.259,
        0.3364, 0.4322, 0.5342, 0.6374, 0.7334, 0.8196, 0.8768, 0.9272, 0.965, 0.9876,
    ],
    "ANMF-FP": [
        0.0084, 0.0084, 0.0084, 0.009, 0.009, 0.0092, 0.0092, 0.0096, 0.01, 0.011,
        0.0114, 0.012, 0.013, 0.014, 0.0146, 0.0172, 0.0186, 0.0216, 0.0272, 0.0322,
        0.0408, 0.0518, 0.0686, 0.0908, 0.1194, 0.16, 0.2128, 0.2804, 0.3588, 0.4616,
        0.5704, 0.67, 0.7596, 0.8404, 0.9002, 0.9444, 0.9714, 0.9886, 0.996, 0.998,
    ],
}

REFERENCE_PD: Dict[str, Dict[str, List[float]]] = {
    GAUSSIAN_LABEL: _GAUSSIAN,
    COMPOUND_LABEL: _COMPOUND,
}

# mean per-sample detection time in milliseconds
REFERENCE_TIMING_MS: Dict[str, float] = {
    "MF": 0.0516,
    "NMF": 0.1376,
    "AMF-SCM": 0.0970,
    "ANMF-FP": 1.9255,
    "SVDD": 0.4042,
    "D-RFM": 0.0209,
}

REFERENCE_ONLY = ("SVDD",)


def reference_curve(scenario_label: str, detector: str) -> Optional[List[Tuple[float, float]]]:
    """``(snr_db, pd)`` pairs for a detector in a scenario, or None when unpublished."""
    values = REFERENCE_PD.get(scenario_label, {}).get(detector)
    if values is None:
        return None
    return list(zip(REFERENCE_SNR_DB, values))


def reference_pd(scenario_label: str, detector: str, snr_db: float) -> Optional[float]:
    """Published Pd at an integer SNR grid point, or None."""
    values = REFERENCE_PD.get(scenario_label, {}).get(detector)
    if values is None or float(snr_db) != round(snr_db):
        return None
    index = int(round(snr_db)) + 20
    if not 0 <= index < len(values):
        return None
    return values[index]


def reference_timing_ms(detector: str) -> Optional[float]:
    return REFERENCE_TIMING_MS.get(detector)
