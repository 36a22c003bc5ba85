from .bench import BenchEntry, BenchResult, bench
from .evaluation import (
    DopplerMap,
    PdCurve,
    PfaMeasurement,
    calibrate_all,
    doppler_map,
    measure_pfa,
    pd_sweep,
    wilson_halfwidth,
)
from .handles import DetectorHandle, attach_thresholds, build_handles
from .plot_formatter import PlotFormatter
from .reference_curves import reference_curve, reference_pd, reference_timing_ms
from .result_saver import ResultSaver, export_results, parse_pd_curves

__all__ = [
    "BenchEntry",
    "BenchResult",
    "DetectorHandle",
    "DopplerMap",
    "PdCurve",
    "PfaMeasurement",
    "PlotFormatter",
    "ResultSaver",
    "attach_thresholds",
    "bench",
    "build_handles",
    "calibrate_all",
    "doppler_map",
    "export_results",
    "measure_pfa",
    "parse_pd_curves",
    "pd_sweep",
    "reference_curve",
    "reference_pd",
    "reference_timing_ms",
    "wilson_halfwidth",
]
