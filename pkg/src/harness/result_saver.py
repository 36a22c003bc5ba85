"""Writes and reads the CSV/JSON result artifacts of an evaluation run."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from src.atomic_io import atomic_write_text
from src.detectors.drfm_detector import Threshold, ThresholdSource
from src.errors import MissingInput
from src.harness.bench import BenchResult
from src.harness.evaluation import DopplerMap, PdCurve, PfaMeasurement
from src.harness.reference_curves import reference_pd
from src.linalg.complex_linalg import HermitianMatrix

try:
    from .plot_formatter import PlotFormatter
except ImportError:
    PlotFormatter = None

logger = logging.getLogger(__name__)

PD_CURVE_COLUMNS = ["detector", "scenario", "doppler_bin", "snr_db", "pd", "trials", "ci95_halfwidth"]
DOPPLER_MAP_COLUMNS = ["detector", "scenario", "doppler_bin", "snr_db", "pd"]
BENCH_COLUMNS = ["detector", "mode", "mean_ms", "samples_per_snr", "snr_points", "reference_ms_from_paper"]
THRESHOLD_COLUMNS = [
    "detector", "scenario", "lambda", "pfa_target", "calibration_size", "source", "analytic_lambda",
    "scenario_digest",
]
PFA_COLUMNS = ["detector", "scenario", "pfa_target", "pfa_measured", "test_size"]
GAP_COLUMNS = ["detector", "scenario", "snr_db", "pd_measured", "pd_reference", "gap"]


def _num(value: Optional[float]) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_rows(path: Path) -> List[Dict[str, str]]:
    if not path.exists():
        raise MissingInput(f"{path} not found")
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def pd_curves_to_csv(curves: Sequence[PdCurve]) -> str:
    rows = []
    for c in curves:
        for snr, pd, half in zip(c.snr_grid_db, c.pd, c.wilson_ci_halfwidth):
            rows.append([c.detector, c.scenario, _num(c.doppler_bin), _num(snr), _num(pd), c.trials_per_point, _num(half)])
    return _csv_text(PD_CURVE_COLUMNS, rows)


def parse_pd_curves(text: str) -> List[PdCurve]:
    """Rebuild PdCurve objects from ``pd_curve.csv`` text, preserving row order."""
    grouped: Dict[tuple, Dict[str, list]] = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = (row["detector"], row["scenario"], float(row["doppler_bin"]), int(row["trials"]))
        bucket = grouped.setdefault(key, {"snr": [], "pd": [], "half": []})
        bucket["snr"].append(float(row["snr_db"]))
        bucket["pd"].append(float(row["pd"]))
        bucket["half"].append(float(row["ci95_halfwidth"]))
    return [
        PdCurve(
            detector=detector,
            scenario=scenario,
            doppler_bin=d,
            snr_grid_db=b["snr"],
            pd=b["pd"],
            trials_per_point=trials,
            wilson_ci_halfwidth=b["half"],
        )
        for (detector, scenario, d, trials), b in grouped.items()
    ]


def doppler_maps_to_csv(maps: Sequence[DopplerMap]) -> str:
    rows = []
    for m in maps:
        for i, d in enumerate(m.doppler_bins):
            for j, snr in enumerate(m.snr_grid_db):
                rows.append([m.detector, m.scenario, _num(d), _num(snr), _num(m.pd[i, j])])
    return _csv_text(DOPPLER_MAP_COLUMNS, rows)


def bench_to_csv(result: BenchResult) -> str:
    rows = [
        [e.detector, e.mode, _num(e.mean_ms), e.samples_per_snr, e.snr_points, _num(e.reference_ms)]
        for e in result.entries
    ]
    return _csv_text(BENCH_COLUMNS, rows)


def thresholds_to_csv(
    thresholds: Dict[str, Threshold], scenario: str, analytic: Dict[str, Optional[float]]
) -> str:
    rows = [
        [
            name,
            scenario,
            _num(t.lam),
            _num(t.pfa_target),
            t.calibration_size,
            t.source.value,
            _num(analytic.get(name)),
            t.scenario_digest or "",
        ]
        for name, t in thresholds.items()
    ]
    return _csv_text(THRESHOLD_COLUMNS, rows)


def pfa_to_csv(measurements: Sequence[PfaMeasurement]) -> str:
    rows = [
        [m.detector, m.scenario, _num(m.pfa_target), _num(m.pfa_measured), m.test_size] for m in measurements
    ]
    return _csv_text(PFA_COLUMNS, rows)


def reference_gap_to_csv(curves: Sequence[PdCurve]) -> str:
    rows = []
    for c in curves:
        for snr, pd in zip(c.snr_grid_db, c.pd):
            ref = reference_pd(c.scenario, c.detector, snr)
            if ref is None:
                continue
            rows.append([c.detector, c.scenario, _num(snr), _num(pd), _num(ref), _num(pd - ref)])
    return _csv_text(GAP_COLUMNS, rows)


def matrix_to_csv(matrix: Union[HermitianMatrix, np.ndarray]) -> str:
    """Rows of interleaved ``re, im`` values for debugging covariance matrices."""
    a = matrix.entries if isinstance(matrix, HermitianMatrix) else np.asarray(matrix)
    n = a.shape[1]
    columns = [f"{part}_{j}" for j in range(n) for part in ("re", "im")]
    rows = [[_num(v) for z in row for v in (z.real, z.imag)] for row in a]
    return _csv_text(columns, rows)


class ResultSaver:
    """Saves evaluation artifacts into one output directory."""

    def __init__(self, base_dir: Union[str, Path] = "results"):
        """Initialize result saver.

        Args:
            base_dir: Directory receiving every artifact
        """
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)

    def _write(self, name: str, text: str) -> str:
        path = atomic_write_text(self.base_dir / name, text)
        logger.info("Wrote %s", path)
        return str(path)

    def save_pd_curves(self, curves: Sequence[PdCurve]) -> str:
        return self._write("pd_curve.csv", pd_curves_to_csv(curves))

    def save_doppler_maps(self, maps: Sequence[DopplerMap]) -> str:
        return self._write("doppler_map.csv", doppler_maps_to_csv(maps))

    def save_bench(self, result: BenchResult) -> Dict[str, str]:
        """Save timing table plus the CPU context it was measured on.

        Returns:
            Dict with paths to saved files
        """
        context = {"snr_list_db": result.snr_list_db, "doppler_bin": result.doppler_bin, **result.context}
        return {
            "bench": self._write("bench.csv", bench_to_csv(result)),
            "context": self.save_json("bench_context.json", context),
        }

    def save_thresholds(
        self, thresholds: Dict[str, Threshold], scenario: str, analytic: Dict[str, Optional[float]]
    ) -> str:
        return self._write("thresholds.csv", thresholds_to_csv(thresholds, scenario, analytic))

    def load_thresholds(self) -> Dict[str, Threshold]:
        """Thresholds written by :meth:`save_thresholds`.

        Raises:
            MissingInput: thresholds.csv absent.
        """
        out = {}
        for row in _read_rows(self.base_dir / "thresholds.csv"):
            out[row["detector"]] = Threshold(
                lam=float(row["lambda"]),
                pfa_target=float(row["pfa_target"]),
                calibration_size=int(row["calibration_size"]),
                source=ThresholdSource(row["source"]),
                scenario_digest=row.get("scenario_digest") or None,
            )
        return out

    def save_pfa(self, measurements: Sequence[PfaMeasurement]) -> str:
        return self._write("pfa.csv", pfa_to_csv(measurements))

    def save_reference_gap(self, curves: Sequence[PdCurve]) -> str:
        return self._write("pd_reference_gap.csv", reference_gap_to_csv(curves))

    def save_json(self, name: str, data: Dict[str, Any]) -> str:
        return self._write(name, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def save_matrix_debug(self, name: str, matrix: Union[HermitianMatrix, np.ndarray]) -> str:
        return self._write(f"debug_{name}.csv", matrix_to_csv(matrix))

    def save_svg(self, name: str, svg: str) -> str:
        return self._write(name, svg)

    def save_summary(self, text: str) -> str:
        return self._write("summary.txt", text)


def export_results(
    out_dir: Union[str, Path],
    curves: Optional[Sequence[PdCurve]] = None,
    maps: Optional[Sequence[DopplerMap]] = None,
    bench: Optional[BenchResult] = None,
    pfa: Optional[Sequence[PfaMeasurement]] = None,
    emit_svg: bool = True,
) -> Dict[str, str]:
    """Write every supplied artifact, plus SVG plots when enabled.

    Returns:
        Artifact name to written path.
    """
    saver = ResultSaver(out_dir)
    paths: Dict[str, str] = {}
    if curves:
        paths["pd_curve"] = saver.save_pd_curves(curves)
        paths["pd_reference_gap"] = saver.save_reference_gap(curves)
    if maps:
        paths["doppler_map"] = saver.save_doppler_maps(maps)
    if bench is not None:
        paths.update(saver.save_bench(bench))
    if pfa:
        paths["pfa"] = saver.save_pfa(pfa)

    if emit_svg and PlotFormatter is not None:
        formatter = PlotFormatter()
        try:
            if curves:
                for scenario in sorted({c.scenario for c in curves}):
                    subset = [c for c in curves if c.scenario == scenario]
                    name = f"pd_curve_{_slug(scenario)}.svg"
                    paths[name] = saver.save_svg(name, formatter.pd_curves_svg(subset, scenario))
            for m in maps or []:
                name = f"doppler_map_{_slug(m.detector)}_{_slug(m.scenario)}.svg"
                paths[name] = saver.save_svg(name, formatter.doppler_map_svg(m))
        except Exception as e:
            logger.warning("Could not render SVG plots: %s", e)
    if curves or bench is not None or pfa:
        summary = PlotFormatter.format_summary(curves or [], pfa or [], bench) if PlotFormatter else ""
        if summary:
            paths["summary"] = saver.save_summary(summary)
    return paths


def _slug(text: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in text).strip("_")
