#!/usr/bin/env python3
"""Reprint the summary of a result directory, with gaps to the published curves."""

import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.harness.plot_formatter import PlotFormatter  # noqa: E402
from src.harness.reference_curves import reference_pd  # noqa: E402
from src.harness.result_saver import parse_pd_curves  # noqa: E402


def main():
    if len(sys.argv) < 2:
        print("Usage: python scripts/view_results.py <results_dir>")
        print("\nExample:")
        print("  python scripts/view_results.py results/gaussian")
        return 2

    path = Path(sys.argv[1]) / "pd_curve.csv"
    if not path.exists():
        print(f"❌ {path} not found; run `cli_radar.py evaluate` first")
        return 4

    curves = parse_pd_curves(path.read_text(encoding="utf-8"))
    print(PlotFormatter.format_summary(curves))

    print("## GAP TO PUBLISHED CURVES")
    print()
    for curve in curves:
        gaps = [
            (snr, pd - ref)
            for snr, pd in zip(curve.snr_grid_db, curve.pd)
            if (ref := reference_pd(curve.scenario, curve.detector, snr)) is not None
        ]
        if not gaps:
            print(f"  {curve.detector:<10} no published curve")
            continue
        worst_snr, worst = max(gaps, key=lambda g: abs(g[1]))
        print(f"  {curve.detector:<10} largest gap {worst:+.4f} at {worst_snr:g} dB ({len(gaps)} points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
