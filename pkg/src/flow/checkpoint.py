"""RFN1 checkpoint files for trained velocity fields.

Layout (little-endian)::

    b"RFN1" | u32 version | u64 header length | JSON header
    | float64 payload in layer order W1, b1, W2, b2, ... | 8-byte checksum

The checksum is an 8-byte BLAKE2b digest of the payload. The JSON header is
written with sorted keys so identical inputs give identical bytes.
"""

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from src.atomic_io import atomic_write_bytes
from src.config.run_config import IntegrationConfig, NetArchitecture, ScenarioConfig, TrainConfig
from src.errors import (
    ArchitectureMismatch,
    CheckpointDigestError,
    CheckpointFormatError,
    CheckpointVersionError,
    DomainError,
    MissingInput,
)
from src.flow.flow_net import MlpParams, TrainReport

logger = logging.getLogger(__name__)

MAGIC = b"RFN1"
VERSION = 1
PREFIX = struct.Struct("<4sIQ")
CHECKSUM_SIZE = 8


@dataclass(eq=False)
class Checkpoint:
    """Decoded checkpoint: parameters plus everything needed to redeploy them."""

    params: MlpParams
    arch: NetArchitecture
    train_cfg: TrainConfig
    training: Dict[str, Any] = field(default_factory=dict)
    scenario: Optional[ScenarioConfig] = None
    integration: Optional[IntegrationConfig] = None
    threshold: Optional[Dict[str, Any]] = None

    @property
    def epochs(self) -> int:
        return self.train_cfg.epochs

    @property
    def seed(self) -> int:
        return self.train_cfg.seed

    def header(self) -> Dict[str, Any]:
        return {
            "format": "RFN1",
            "architecture": self.arch.model_dump(mode="json"),
            "train_config": self.train_cfg.model_dump(mode="json"),
            "seed": self.train_cfg.seed,
            "training": self.training,
            "scenario": self.scenario.snapshot() if self.scenario else None,
            "integration": self.integration.model_dump(mode="json") if self.integration else None,
            "threshold": self.threshold,
            "layer_order": "W1,b1,...,WL,bL; W row-major (fan_out, fan_in)",
        }


def payload_checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=CHECKSUM_SIZE).digest()


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    if not checkpoint.params.matches(checkpoint.arch):
        raise ArchitectureMismatch(
            f"parameters {checkpoint.params.layer_dims} do not fit {checkpoint.arch.layer_dims}"
        )
    header = json.dumps(checkpoint.header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = checkpoint.params.flat().astype("<f8").tobytes()
    return PREFIX.pack(MAGIC, VERSION, len(header)) + header + payload + payload_checksum(payload)


def decode_checkpoint(raw: bytes, expected_arch: Optional[NetArchitecture] = None) -> Checkpoint:
    """Parse RFN1 bytes.

    Args:
        raw: File contents.
        expected_arch: When given, the stored architecture must equal it.

    Raises:
        CheckpointFormatError: truncated or malformed data.
        CheckpointVersionError: unsupported version.
        CheckpointDigestError: payload checksum mismatch.
        ArchitectureMismatch: stored layout differs from ``expected_arch``.
    """
    if len(raw) < PREFIX.size:
        raise CheckpointFormatError("checkpoint truncated before its header")
    magic, version, header_len = PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {version}")
    body_start = PREFIX.size + header_len
    if len(raw) < body_start + CHECKSUM_SIZE:
        raise CheckpointFormatError("checkpoint truncated inside its header")
    try:
        header = json.loads(raw[PREFIX.size : body_start].decode("utf-8"))
        arch = NetArchitecture.model_validate(header["architecture"])
        train_cfg = TrainConfig.model_validate(header["train_config"])
        scenario = ScenarioConfig.from_snapshot(header["scenario"]) if header.get("scenario") else None
        integration = (
            IntegrationConfig.model_validate(header["integration"]) if header.get("integration") else None
        )
    except (UnicodeDecodeError, ValueError, KeyError, ValidationError) as e:
        raise CheckpointFormatError(f"unreadable checkpoint header: {e}") from e

    if expected_arch is not None and arch != expected_arch:
        raise ArchitectureMismatch(
            f"checkpoint holds hidden_dims={arch.hidden_dims}, D={arch.data_dim}; "
            f"requested hidden_dims={expected_arch.hidden_dims}, D={expected_arch.data_dim}"
        )

    payload = raw[body_start:-CHECKSUM_SIZE]
    expected_values = sum(fan_in * fan_out + fan_out for fan_in, fan_out in arch.layer_dims)
    if len(payload) != expected_values * 8:
        raise CheckpointFormatError(
            f"payload holds {len(payload)} bytes, architecture needs {expected_values * 8}"
        )
    if payload_checksum(payload) != raw[-CHECKSUM_SIZE:]:
        raise CheckpointDigestError("checkpoint payload checksum mismatch")

    try:
        params = MlpParams.from_flat(arch, np.frombuffer(payload, dtype="<f8"))
    except DomainError as e:
        raise CheckpointFormatError(f"checkpoint payload rejected: {e}") from e
    return Checkpoint(
        params=params,
        arch=arch,
        train_cfg=train_cfg,
        training=header.get("training") or {},
        scenario=scenario,
        integration=integration,
        threshold=header.get("threshold"),
    )


def save_checkpoint(
    params: MlpParams,
    arch: NetArchitecture,
    cfg: TrainConfig,
    path: Union[str, Path],
    report: Optional[TrainReport] = None,
    scenario: Optional[ScenarioConfig] = None,
    integration: Optional[IntegrationConfig] = None,
    threshold: Optional[Dict[str, Any]] = None,
) -> Path:
    """Atomically write an RFN1 checkpoint.

    Returns:
        The written path.
    """
    checkpoint = Checkpoint(
        params=params,
        arch=arch,
        train_cfg=cfg,
        training=report.to_header() if report else {},
        scenario=scenario,
        integration=integration,
        threshold=threshold,
    )
    return write_checkpoint(checkpoint, path)


def write_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    path = atomic_write_bytes(path, encode_checkpoint(checkpoint))
    logger.info("Wrote checkpoint %s (params %s)", path, checkpoint.params.digest())
    return path


def load_checkpoint(path: Union[str, Path], expected_arch: Optional[NetArchitecture] = None) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"Checkpoint {path} not found; run `train` first")
    return decode_checkpoint(path.read_bytes(), expected_arch)


def checkpoint_digest(raw: bytes) -> str:
    """Short hex id of a whole checkpoint file, used as its cache key."""
    return hashlib.blake2b(raw, digest_size=8).hexdigest()
