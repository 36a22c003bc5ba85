#!/usr/bin/env python3
"""
Command-line pipeline for rectified-flow radar detection.

Usage:
    python cli_radar.py generate --config run.json
    python cli_radar.py train --epochs 1
    python cli_radar.py calibrate
    python cli_radar.py evaluate --detectors MF,D-RFM
    python cli_radar.py doppler
    python cli_radar.py bench
    python cli_radar.py pipeline --scenario compound
"""

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.atomic_io import atomic_write_bytes
from src.config import settings
from src.config.run_config import RunConfig, describe_config_keys, load_run_config
from src.detectors.classical_detectors import analytic_threshold
from src.detectors.drfm_detector import DrfmDetector, Threshold, inverse_map, latent_diagnostics, scenario_digest
from src.errors import ConfigError, MissingInput, exit_code_for
from src.flow.checkpoint import Checkpoint, load_checkpoint, save_checkpoint, write_checkpoint
from src.flow.flow_net import train
from src.flow.redis_checkpointer import connect_checkpoint_store
from src.harness.bench import bench
from src.harness.evaluation import PfaMeasurement, calibrate_all, doppler_map, measure_pfa, pd_sweep
from src.harness.handles import DetectorHandle, attach_thresholds, build_handles
from src.harness.plot_formatter import PlotFormatter
from src.harness.result_saver import ResultSaver, export_results
from src.logging_setup import configure_logging
from src.scenario.dataset_io import load_dataset, save_dataset
from src.scenario.generator import (
    Dataset,
    SecondaryData,
    Split,
    embed_real,
    generate_splits,
    sample_secondary,
    total_covariance,
    unembed_real,
)

logger = logging.getLogger("src.cli")

SPLIT_FILES = {
    Split.TRAIN: "train.rfd",
    Split.VALIDATION: "val.rfd",
    Split.TEST: "test.rfd",
    Split.SECONDARY: "secondary.rfd",
}
LATENT_DIAGNOSTIC_ROWS = 2000


def print_banner(title: str):
    """Print a centered banner."""
    print("\n" + "=" * 80)
    print(title.center(80))
    print("=" * 80 + "\n")


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def scenario_dir(config: RunConfig) -> str:
    return config.scenario.clutter_kind.kind


def data_path(config: RunConfig, split: Split) -> Path:
    return Path(config.paths.data_dir) / scenario_dir(config) / SPLIT_FILES[split]


def checkpoint_path(config: RunConfig) -> Path:
    return Path(config.paths.checkpoint_dir) / f"drfm_{scenario_dir(config)}.rfn"


def out_path(config: RunConfig) -> Path:
    return Path(config.paths.out_dir) / scenario_dir(config)


def thread_cap(args: argparse.Namespace) -> Optional[int]:
    return args.threads or settings.thread_cap


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------


def load_split(config: RunConfig, split: Split) -> Dataset:
    path = data_path(config, split)
    if not path.exists():
        raise MissingInput(f"{path} not found; run `generate` first")
    dataset = load_dataset(path)
    if dataset.config_snapshot != config.scenario:
        print(f"⚠ {path} was generated for a different scenario configuration")
    return dataset


def load_secondary(config: RunConfig) -> SecondaryData:
    dataset = load_split(config, Split.SECONDARY)
    return SecondaryData(z=unembed_real(dataset.x), config_snapshot=dataset.config_snapshot)


def obtain_checkpoint(config: RunConfig) -> Checkpoint:
    """Load the scenario checkpoint, restoring it from the Redis cache when the file is gone."""
    path = checkpoint_path(config)
    if not path.exists():
        store = connect_checkpoint_store(settings)
        blob = store.get(config.scenario.label) if store else None
        if blob is not None:
            atomic_write_bytes(path, blob)
            print(f"✓ Restored checkpoint from Redis cache: {path}")
    return load_checkpoint(path, expected_arch=config.arch)


def publish_checkpoint(config: RunConfig, path: Path) -> None:
    store = connect_checkpoint_store(settings)
    if store is None:
        return
    digest = store.put(config.scenario.label, path.read_bytes())
    print(f"✓ Cached checkpoint {digest} in Redis")


def drfm_detector(config: RunConfig, checkpoint: Checkpoint) -> DrfmDetector:
    integration = checkpoint.integration or config.integration
    if integration != config.integration:
        print(f"⚠ Using the checkpoint's integration settings ({integration.steps} steps) to match its threshold")
    threshold = Threshold.from_header(checkpoint.threshold) if checkpoint.threshold else None
    return DrfmDetector(params=checkpoint.params, integration=integration, threshold=threshold)


def calibrated_handles(config: RunConfig, names: List[str]) -> List[DetectorHandle]:
    """Handles for ``names`` carrying the thresholds written by `calibrate`."""
    drfm = drfm_detector(config, obtain_checkpoint(config)) if "D-RFM" in names else None
    secondary = None if config.evaluation.resample_secondary else load_secondary(config)
    handles = build_handles(config, names, drfm=drfm, secondary=secondary)

    try:
        thresholds = ResultSaver(out_path(config)).load_thresholds()
    except MissingInput:
        if names != ["D-RFM"]:
            raise MissingInput("thresholds.csv not found; run `calibrate` first")
        thresholds = {}
    if drfm is not None and drfm.threshold is not None:
        thresholds["D-RFM"] = drfm.threshold
    check_thresholds(config, {h.name: thresholds[h.name] for h in handles if h.name in thresholds})
    return attach_thresholds(handles, thresholds)


def check_thresholds(config: RunConfig, thresholds: Dict[str, Threshold]) -> None:
    """Refuse thresholds fitted for another Pfa or scenario.

    Raises:
        ConfigError: a threshold's pfa_target or scenario digest differs from the run.
    """
    digest = scenario_digest(config.scenario)
    for name, threshold in thresholds.items():
        if not math.isclose(threshold.pfa_target, config.evaluation.pfa, rel_tol=1e-12):
            raise ConfigError(
                f"{name} threshold was calibrated at Pfa={threshold.pfa_target:g}, "
                f"run asks for {config.evaluation.pfa:g}; run `calibrate` again"
            )
        if threshold.scenario_digest is not None and threshold.scenario_digest != digest:
            raise ConfigError(
                f"{name} threshold belongs to scenario {threshold.scenario_digest}, "
                f"run uses {digest}; run `calibrate` again"
            )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(config: RunConfig, args: argparse.Namespace) -> int:
    """Write train/val/test H0 splits and one secondary-data block."""
    scenario = config.scenario
    print(f"Generating {scenario.label} data (N={scenario.n_pulses}, seed={scenario.seed})...")
    datasets = generate_splits(scenario, config.splits, threads=thread_cap(args))
    secondary = sample_secondary(scenario, config.k_secondary)
    datasets[Split.SECONDARY] = Dataset(
        x=embed_real(secondary.z), split=Split.SECONDARY, config_snapshot=scenario, creation_seed=scenario.seed
    )
    for split, dataset in datasets.items():
        path = save_dataset(dataset, data_path(config, split))
        print(f"✓ {split.name.lower():<10} {len(dataset):>6} rows -> {path}")

    if settings.debug_mode:
        ResultSaver(out_path(config)).save_matrix_debug("total_covariance", total_covariance(scenario))
    return 0


def cmd_train(config: RunConfig, args: argparse.Namespace) -> int:
    """Fit the velocity field on the training split and write the checkpoint."""
    dataset = load_split(config, Split.TRAIN)
    print(f"Training on {len(dataset)} samples for {config.train.epochs} epochs...")
    params, report = train(dataset, config.arch, config.train, progress=None)
    path = save_checkpoint(
        params,
        config.arch,
        config.train,
        checkpoint_path(config),
        report=report,
        scenario=config.scenario,
        integration=config.integration,
    )
    print(f"✓ Final epoch loss: {report.final_loss:.6f}")
    print(f"✓ Checkpoint saved to: {path}")
    publish_checkpoint(config, path)
    return 0


def cmd_calibrate(config: RunConfig, args: argparse.Namespace) -> int:
    """Fix every detector's threshold on the validation split."""
    names = list(config.evaluation.detectors)
    pfa = config.evaluation.pfa
    validation = load_split(config, Split.VALIDATION)
    saver = ResultSaver(out_path(config))

    checkpoint = None
    drfm = None
    if "D-RFM" in names:
        checkpoint = obtain_checkpoint(config)
        if checkpoint.scenario is not None and checkpoint.scenario != config.scenario:
            print("⚠ Checkpoint was trained on a different scenario configuration")
        checkpoint.integration = config.integration
        drfm = DrfmDetector(params=checkpoint.params, integration=config.integration)
    secondary = None if config.evaluation.resample_secondary else load_secondary(config)
    handles = build_handles(config, names, drfm=drfm, secondary=secondary)

    print(f"Calibrating {len(handles)} detectors at Pfa={pfa:g} on {len(validation)} samples...")
    thresholds = calibrate_all(
        handles, validation.observations(), pfa, config.scenario, d=config.evaluation.doppler_bin
    )
    digest = scenario_digest(config.scenario)
    thresholds = {name: dataclasses.replace(t, scenario_digest=digest) for name, t in thresholds.items()}
    analytic = {name: analytic_threshold(name, pfa, config.scenario.n_pulses) for name in thresholds}
    saver.save_thresholds(thresholds, config.scenario.label, analytic)
    for name, threshold in thresholds.items():
        reference = "" if analytic[name] is None else f"  (analytic {analytic[name]:.5g})"
        print(f"✓ {name:<10} lambda = {threshold.lam:.6g}{reference}")

    if checkpoint is not None:
        checkpoint.threshold = thresholds["D-RFM"].to_header()
        path = write_checkpoint(checkpoint, checkpoint_path(config))
        print(f"✓ Threshold embedded in {path}")
        publish_checkpoint(config, path)

        z = inverse_map(checkpoint.params, validation.x[:LATENT_DIAGNOSTIC_ROWS], config.integration)
        saver.save_json("latent_diagnostics.json", latent_diagnostics(z))
    return 0


def cmd_evaluate(config: RunConfig, args: argparse.Namespace) -> int:
    """Held-out Pfa plus Pd-vs-SNR curves for every detector."""
    evaluation = config.evaluation
    handles = calibrated_handles(config, list(evaluation.detectors))
    test = load_split(config, Split.TEST)
    d = evaluation.doppler_bin

    pfa: List[PfaMeasurement] = []
    for handle in handles:
        measured = measure_pfa(handle, handle.threshold, test.observations(), config.scenario, d)
        pfa.append(PfaMeasurement(handle.name, config.scenario.label, evaluation.pfa, measured, len(test)))

    grid = evaluation.snr_grid_db
    print(f"Sweeping {len(grid)} SNR points x {evaluation.trials} trials at Doppler bin {d:g}...")
    curves = [pd_sweep(h, grid, d, evaluation.trials, config.scenario, threads=thread_cap(args), progress=None)
              for h in handles]
    paths = export_results(out_path(config), curves=curves, pfa=pfa, emit_svg=evaluation.emit_svg)
    print(PlotFormatter.format_summary(curves, pfa))
    print(f"✓ Pd curves saved to: {paths['pd_curve']}")
    return 0


def cmd_doppler(config: RunConfig, args: argparse.Namespace) -> int:
    """Pd maps over Doppler bin and SNR."""
    evaluation = config.evaluation
    handles = calibrated_handles(config, list(evaluation.detectors))
    bins = config.doppler_bins
    print(f"Mapping {len(bins)} Doppler bins x {len(evaluation.snr_grid_db)} SNR points...")
    maps = [
        doppler_map(h, evaluation.snr_grid_db, config.scenario, evaluation.trials, bins,
                    threads=thread_cap(args), progress=None)
        for h in handles
    ]
    paths = export_results(out_path(config), maps=maps, emit_svg=evaluation.emit_svg)
    print(f"✓ Doppler maps saved to: {paths['doppler_map']}")
    return 0


def cmd_bench(config: RunConfig, args: argparse.Namespace) -> int:
    """Per-sample detection time, single worker."""
    evaluation = config.evaluation
    if args.threads not in (None, 1):
        print("⚠ bench always runs on one worker; --threads ignored")
    handles = calibrated_handles(config, list(evaluation.detectors))
    result = bench(handles, config.scenario, evaluation.bench_samples, evaluation.bench_snr_db, evaluation.doppler_bin)
    paths = export_results(out_path(config), bench=result, emit_svg=False)
    print(PlotFormatter.format_summary([], [], result))
    print(f"✓ Timing table saved to: {paths['bench']}")
    return 0


def cmd_pipeline(config: RunConfig, args: argparse.Namespace) -> int:
    """generate -> train -> calibrate -> evaluate with one configuration."""
    for stage in (cmd_generate, cmd_train, cmd_calibrate, cmd_evaluate):
        print_banner(stage.__name__.replace("cmd_", "").upper())
        stage(config, args)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "calibrate": cmd_calibrate,
    "evaluate": cmd_evaluate,
    "doppler": cmd_doppler,
    "bench": cmd_bench,
    "pipeline": cmd_pipeline,
}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def config_epilog() -> str:
    rows = describe_config_keys()
    width = max(len(key) for key, _, _ in rows)
    lines = ["configuration keys (JSON, dotted path = default):"]
    for key, default, description in rows:
        lines.append(f"  {key:<{width}}  {default:<12} {description}")
    lines.append("")
    lines.append("environment: RFM_RADAR_OUT, RFM_RADAR_THREADS, LOG_LEVEL, REDIS_HOST, REDIS_PORT,")
    lines.append("             REDIS_PASSWORD, REDIS_TTL, DEBUG_MODE")
    lines.append("exit codes: 0 ok, 1 numerical, 2 config, 3 I/O or format, 4 missing input,")
    lines.append("            5 dimension mismatch, 6 Tyler not converged")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (default: built-in defaults)")
    common.add_argument("--seed", type=int, help="Seed for scenario and training")
    common.add_argument("--scenario", choices=["gaussian", "compound"], help="Clutter family")
    common.add_argument("--snr-min", type=float, help="First SNR grid point (dB)")
    common.add_argument("--snr-max", type=float, help="Last SNR grid point (dB)")
    common.add_argument("--trials", type=int, help="H1 trials per SNR point")
    common.add_argument("--steps", type=int, help="Euler integration steps")
    common.add_argument("--epochs", type=int, help="Training epochs")
    common.add_argument("--detectors", help="Comma-separated detector subset, e.g. MF,ANMF-FP,D-RFM")
    common.add_argument("--fixed-secondary", action="store_true",
                        help="Reuse one secondary-data block instead of resampling per trial")
    common.add_argument("--out", help="Result directory")
    common.add_argument("--threads", type=int, help="Worker cap for sweeps")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="cli_radar.py",
        description="Rectified flow matching radar detection and classical CFAR baselines.",
        epilog=config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(
            name,
            parents=[common],
            help=fn.__doc__.splitlines()[0],
            epilog=config_epilog(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Map CLI flags to dotted RunConfig keys."""
    overrides: Dict[str, Any] = {
        "scenario.seed": args.seed,
        "train.seed": args.seed,
        "evaluation.snr_min_db": args.snr_min,
        "evaluation.snr_max_db": args.snr_max,
        "evaluation.trials": args.trials,
        "integration.steps": args.steps,
        "train.epochs": args.epochs,
        "paths.out_dir": args.out,
    }
    if args.scenario == "gaussian":
        overrides["scenario.clutter_kind"] = {"kind": "gaussian"}
    elif args.scenario == "compound":
        overrides["scenario.clutter_kind.kind"] = "compound"
    if args.detectors:
        overrides["evaluation.detectors"] = [name.strip() for name in args.detectors.split(",") if name.strip()]
    if args.fixed_secondary:
        overrides["evaluation.resample_secondary"] = False
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)

    try:
        settings.validate()
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config = load_run_config(args.config, overrides_from_args(args))
        return COMMANDS[args.command](config, args)
    except KeyboardInterrupt:
        print("\n\nInterrupted.")
        return 130
    except Exception as e:
        code = exit_code_for(e)
        if code == 1 and not hasattr(e, "exit_code"):
            logger.exception("Unexpected failure")
        print(f"❌ {type(e).__name__}: {e}")
        return code


if __name__ == "__main__":
    sys.exit(main())
