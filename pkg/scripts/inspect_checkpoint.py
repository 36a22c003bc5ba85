#!/usr/bin/env python3
"""
Print the header of an RFN1 checkpoint file.

Usage:
    python scripts/inspect_checkpoint.py checkpoints/drfm_gaussian.rfn
    python scripts/inspect_checkpoint.py checkpoints/drfm_gaussian.rfn --json
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.errors import RadarDetectionError  # noqa: E402
from src.flow.checkpoint import checkpoint_digest, load_checkpoint  # noqa: E402


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1]
    try:
        ckpt = load_checkpoint(path)
    except RadarDetectionError as e:
        print(f"❌ {e}")
        return e.exit_code

    if "--json" in sys.argv[2:]:
        print(json.dumps(ckpt.header(), indent=2, sort_keys=True))
        return 0

    print("=" * 80)
    print(f"CHECKPOINT: {os.path.basename(path)}".center(80))
    print("=" * 80 + "\n")
    with open(path, "rb") as f:
        print(f"Digest:        {checkpoint_digest(f.read())}")
    print(f"Layers:        {[ckpt.arch.input_dim, *ckpt.arch.hidden_dims, ckpt.arch.output_dim]}")
    print(f"Parameters:    {ckpt.params.flat().size}")
    print(f"Training:      {ckpt.epochs} epochs, batch {ckpt.train_cfg.batch_size}, seed {ckpt.seed}")
    losses = ckpt.training.get("epoch_losses") or []
    if losses:
        print(f"Loss:          {losses[0]:.6f} -> {losses[-1]:.6f}")
    if ckpt.scenario is not None:
        print(f"Scenario:      {ckpt.scenario.label}, N={ckpt.scenario.n_pulses}, rho={ckpt.scenario.rho:g}")
    if ckpt.integration is not None:
        print(f"Integration:   {ckpt.integration.scheme}, {ckpt.integration.steps} steps")
    if ckpt.threshold:
        t = ckpt.threshold
        print(f"Threshold:     {t['lambda']:.6g} (Pfa {t['pfa_target']:g}, {t['calibration_size']} samples)")
    else:
        print("Threshold:     not calibrated; run `cli_radar.py calibrate`")
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
