#!/usr/bin/env python3
"""View detector checkpoints cached in Redis."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from src.config import settings  # noqa: E402
from src.errors import CheckpointFormatError  # noqa: E402
from src.flow.checkpoint import decode_checkpoint  # noqa: E402
from src.flow.redis_checkpointer import connect_checkpoint_store  # noqa: E402


def main():
    scenario = sys.argv[1] if len(sys.argv) > 1 else None
    store = connect_checkpoint_store(settings)
    if store is None:
        print("✗ Redis not reachable")
        print("\nCheck your .env file has:")
        print("  REDIS_HOST=...")
        print("  REDIS_PORT=...")
        print("  REDIS_PASSWORD=...")
        return 1
    print("✓ Connected to Redis\n")

    print("=" * 80)
    print("CACHED DETECTOR CHECKPOINTS".center(80))
    print("=" * 80 + "\n")

    entries = store.list(scenario)
    if not entries:
        print("No cached checkpoints found.")
        print(f"\nCheckpoints expire after {int(settings.redis_ttl) / 86400:.0f} days.")
        return 0

    for key, ttl in entries:
        *_, label, digest = key.split(":")
        print(f"Checkpoint {digest} ({label})")
        print("-" * 80)
        blob = store.get(label, digest)
        if blob is None:
            print("  [Expired]\n")
            continue
        try:
            ckpt = decode_checkpoint(blob)
        except CheckpointFormatError as e:
            print(f"  Error decoding checkpoint: {e}\n")
            continue
        print(f"  Architecture: {ckpt.arch.data_dim} -> {ckpt.arch.hidden_dims} -> {ckpt.arch.data_dim}")
        print(f"  Epochs: {ckpt.epochs}  seed: {ckpt.seed}")
        if ckpt.threshold:
            print(f"  Threshold: {ckpt.threshold['lambda']:.6g} at Pfa {ckpt.threshold['pfa_target']:g}")
        else:
            print("  Threshold: not calibrated")
        print(f"  Size: {len(blob) / 1024:.1f} KiB  TTL: {max(ttl, 0) / 3600:.1f} hours remaining\n")

    print("=" * 80)
    print(f"Total cached checkpoints: {len(entries)}")
    print("=" * 80)
    return 0


if __name__ == "__main__":
    sys.exit(main())
