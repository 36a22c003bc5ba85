"""RFD1 dataset files, JSON sidecars and CSV export."""

import csv
import io
import json
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.atomic_io import atomic_write_group, atomic_write_text
from src.config.run_config import ScenarioConfig
from src.errors import DatasetFormatError, MissingInput
from src.scenario.generator import Dataset, Split

logger = logging.getLogger(__name__)

MAGIC = b"RFD1"
VERSION = 1
# magic, version, N, D, rows, seed, split tag
HEADER = struct.Struct("<4sIIIQQB")


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def encode_dataset(dataset: Dataset) -> bytes:
    cfg = dataset.config_snapshot
    header = HEADER.pack(
        MAGIC,
        VERSION,
        cfg.n_pulses,
        cfg.data_dim,
        len(dataset),
        dataset.creation_seed,
        int(dataset.split),
    )
    payload = np.ascontiguousarray(dataset.x, dtype="<f4").tobytes()
    return header + payload


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write ``dataset`` as RFD1 plus its ``.meta.json`` sidecar.

    Args:
        dataset: Dataset to persist.
        path: Target ``.rfd`` file.

    Returns:
        Path of the written data file.
    """
    path = Path(path)
    meta = {
        "format": "RFD1",
        "version": VERSION,
        "split": dataset.split.name.lower(),
        "rows": len(dataset),
        "creation_seed": dataset.creation_seed,
        "scenario": dataset.config_snapshot.snapshot(),
        "label": dataset.config_snapshot.label,
    }
    sidecar = (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8")
    # sidecar first: a visible data file always has its metadata
    atomic_write_group({sidecar_path(path): sidecar, path: encode_dataset(dataset)})
    logger.info("Saved %s split (%d rows) to %s", meta["split"], len(dataset), path)
    return path


def load_dataset(path: Union[str, Path]) -> Dataset:
    """Read an RFD1 file and its sidecar back into a Dataset.

    Raises:
        MissingInput: data file or sidecar absent.
        DatasetFormatError: bad magic, version, header or payload size.
    """
    path = Path(path)
    meta_path = sidecar_path(path)
    if not path.exists() or not meta_path.exists():
        raise MissingInput(f"Dataset {path} (or its sidecar) not found; run `generate` first")

    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise DatasetFormatError(f"{path}: truncated header")
    magic, version, n, d, rows, seed, tag = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    if d != 2 * n:
        raise DatasetFormatError(f"{path}: D={d} is not 2N for N={n}")
    expected = HEADER.size + rows * d * 4
    if len(raw) != expected:
        raise DatasetFormatError(f"{path}: payload holds {len(raw)} bytes, expected {expected}")
    try:
        split = Split(tag)
    except ValueError as e:
        raise DatasetFormatError(f"{path}: unknown split tag {tag}") from e

    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        cfg = ScenarioConfig.from_snapshot(meta["scenario"])
    except (ValueError, KeyError) as e:
        raise DatasetFormatError(f"{meta_path}: unreadable sidecar ({e})") from e
    if cfg.n_pulses != n:
        raise DatasetFormatError(f"{path}: header N={n} disagrees with sidecar N={cfg.n_pulses}")
    if (meta.get("rows"), meta.get("creation_seed"), meta.get("split")) != (rows, seed, split.name.lower()):
        raise DatasetFormatError(f"{meta_path}: sidecar does not describe {path.name}")

    x = np.frombuffer(raw, dtype="<f4", offset=HEADER.size).reshape(rows, d).astype(np.float64)
    return Dataset(x=x, split=split, config_snapshot=cfg, creation_seed=seed)


def dataset_to_csv(dataset: Dataset) -> str:
    """CSV text with header ``re_0..re_{N-1},im_0..im_{N-1}``."""
    n = dataset.config_snapshot.n_pulses
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"re_{k}" for k in range(n)] + [f"im_{k}" for k in range(n)])
    for row in dataset.x:
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def export_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    return atomic_write_text(path, dataset_to_csv(dataset))
