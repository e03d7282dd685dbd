"""CSV tables, binary field dumps and run manifests."""

from __future__ import annotations

import csv
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return ""
    return str(value)


def write_csv(path: str | Path, header, rows) -> Path:
    """Write rows (sequences or dicts keyed by header) with 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_field(path: str | Path, velocity: np.ndarray) -> Path:
    """Flat binary dump: N as little-endian int64, then u_x, u_y, u_z as
    little-endian float64, each with the x index varying fastest."""
    velocity = np.asarray(velocity, dtype=float)
    n = velocity.shape[1]
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(np.array([n], dtype="<i8").tobytes())
        for comp in velocity:
            fh.write(np.asarray(comp, dtype="<f8").tobytes(order="F"))
    return path


def read_field(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    n = int(np.frombuffer(raw[:8], dtype="<i8")[0])
    data = np.frombuffer(raw[8:], dtype="<f8")
    if data.size != 3 * n ** 3:
        raise ValueError(f"field dump {path} has {data.size} values, expected {3 * n ** 3}")
    return np.stack([data[c * n ** 3:(c + 1) * n ** 3].reshape((n, n, n), order="F")
                     for c in range(3)])


def versions() -> dict:
    return {
        "aerokin": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "kernel_backend": kernels.BACKEND,
    }


def write_manifest(out_dir: str | Path, command: str, argv, seed: int, config: dict,
                   extra: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": config,
        "versions": versions(),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
