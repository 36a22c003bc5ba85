"""Renders evaluation results as SVG figures and a plain-text summary."""

import io
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from src.harness.bench import BenchResult  # noqa: E402
from src.harness.evaluation import DopplerMap, PdCurve, PfaMeasurement  # noqa: E402
from src.harness.reference_curves import REFERENCE_ONLY, reference_curve  # noqa: E402

# fixed salt and no date keep repeated renders byte-identical
_SVG_RC = {"svg.hashsalt": "rfm-radar", "svg.fonttype": "none"}

_COLORS: Dict[str, str] = {
    "D-RFM": "tab:red",
    "MF": "tab:blue",
    "NMF": "tab:cyan",
    "AMF-SCM": "tab:green",
    "ANMF-SCM": "tab:olive",
    "ANMF-FP": "tab:purple",
    "SVDD": "tab:gray",
}


def _to_svg(fig: Figure) -> str:
    buffer = io.StringIO()
    with rc_context(_SVG_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


class PlotFormatter:
    """Formats Pd curves, Doppler maps and run summaries."""

    def __init__(self, width: float = 7.0, height: float = 4.5):
        self.size = (width, height)

    def pd_curves_svg(self, curves: Sequence[PdCurve], scenario: str, with_reference: bool = True) -> str:
        """Pd versus SNR for every measured detector, with published curves dashed.

        Args:
            curves: Measured curves of one scenario.
            scenario: Scenario label used for the title and reference lookup.
            with_reference: Overlay published curves for measured detectors and SVDD.

        Returns:
            SVG document text.
        """
        with rc_context(_SVG_RC):
            fig = Figure(figsize=self.size)
            ax = fig.add_subplot()
            for curve in curves:
                color = _COLORS.get(curve.detector)
                ax.plot(curve.snr_grid_db, curve.pd, marker="o", markersize=3, color=color, label=curve.detector)
            if with_reference:
                measured = [c.detector for c in curves]
                for name in measured + [n for n in REFERENCE_ONLY if n not in measured]:
                    ref = reference_curve(scenario, name)
                    if ref is None:
                        continue
                    snr, pd = zip(*ref)
                    ax.plot(snr, pd, linestyle="--", linewidth=1, color=_COLORS.get(name), label=f"{name} (published)")
            ax.set_xlim(-20, 20)
            ax.set_ylim(0, 1)
            ax.set_xlabel("SNR (dB)")
            ax.set_ylabel("Pd")
            ax.set_title(f"Pd vs SNR, {scenario}")
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize="small", loc="upper left")
            fig.tight_layout()
            return _to_svg(fig)

    def doppler_map_svg(self, doppler: DopplerMap) -> str:
        """Heat map of Pd over Doppler bin and SNR."""
        with rc_context(_SVG_RC):
            fig = Figure(figsize=self.size)
            ax = fig.add_subplot()
            snr = doppler.snr_grid_db
            bins = doppler.doppler_bins
            image = ax.imshow(
                doppler.pd,
                origin="lower",
                aspect="auto",
                vmin=0.0,
                vmax=1.0,
                cmap="viridis",
                extent=(snr[0], snr[-1], bins[0] - 0.5, bins[-1] + 0.5),
                interpolation="nearest",
            )
            fig.colorbar(image, ax=ax, label="Pd")
            ax.set_xlabel("SNR (dB)")
            ax.set_ylabel("Doppler bin")
            ax.set_title(f"{doppler.detector}, {doppler.scenario}")
            fig.tight_layout()
            return _to_svg(fig)

    @staticmethod
    def format_summary(
        curves: Sequence[PdCurve],
        pfa: Sequence[PfaMeasurement] = (),
        bench: Optional[BenchResult] = None,
    ) -> str:
        """Human-readable run summary.

        Args:
            curves: Measured Pd curves.
            pfa: Held-out false-alarm measurements.
            bench: Timing result, if measured.

        Returns:
            Formatted string suitable for the terminal or summary.txt
        """
        lines: List[str] = []
        lines.append("=" * 80)
        lines.append("RADAR DETECTION RESULTS".center(80))
        lines.append("=" * 80)
        lines.append("")

        if pfa:
            lines.append("## FALSE ALARM RATE")
            lines.append("")
            for m in pfa:
                lines.append(
                    f"  {m.detector:<10} {m.scenario:<10} target {m.pfa_target:.4g}  "
                    f"measured {m.pfa_measured:.4g}  (n={m.test_size})"
                )
            lines.append("")
            lines.append("-" * 80)
            lines.append("")

        if curves:
            lines.append("## DETECTION PROBABILITY")
            lines.append("")
            for c in curves:
                lines.append(f"**{c.detector}** ({c.scenario}, bin {c.doppler_bin:g}, {c.trials_per_point} trials)")
                crossing = next((s for s, p in zip(c.snr_grid_db, c.pd) if p >= 0.5), None)
                if crossing is None:
                    lines.append("  Pd never reaches 0.5 on this grid")
                else:
                    lines.append(f"  Pd >= 0.5 from {crossing:g} dB")
                lines.append(f"  Pd at {c.snr_grid_db[-1]:g} dB: {c.pd[-1]:.4f}")
                lines.append("")
            lines.append("-" * 80)
            lines.append("")

        if bench is not None:
            lines.append("## PER-SAMPLE DETECTION TIME")
            lines.append("")
            for e in bench.entries:
                ref = "" if e.reference_ms is None else f"  (published {e.reference_ms:.4f} ms)"
                lines.append(f"  {e.detector:<10} {e.mode:<11} {e.mean_ms:.4f} ms{ref}")
            lines.append("")

        lines.append("=" * 80)
        return "\n".join(lines) + "\n"
