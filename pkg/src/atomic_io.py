"""Write-to-temp then rename, so a failed write never leaves a partial file."""

import os
import tempfile
from pathlib import Path
from typing import Dict, List, Tuple, Union


def _write_temp(path: Path, data: bytes) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
    except BaseException:
        os.unlink(tmp)
        raise
    return tmp


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> Path:
    path = Path(path)
    tmp = _write_temp(path, data)
    try:
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_group(files: Dict[Union[str, Path], bytes]) -> List[Path]:
    """Write several files so that none is renamed into place before all are on disk.

    Renames follow the mapping's insertion order; put the file that marks
    the group as complete last.
    """
    staged: List[Tuple[str, Path]] = []
    try:
        for path, data in files.items():
            path = Path(path)
            staged.append((_write_temp(path, data), path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    return [path for _, path in staged]
