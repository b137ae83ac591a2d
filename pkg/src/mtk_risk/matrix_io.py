"""Matrix and table CSV I/O.

Values are written with 17 significant digits so every double survives a
write/read cycle unchanged.  Matrix files start with ``# rows=m cols=r pstar=<v>``.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

__all__ = ["fmt", "write_matrix", "read_matrix", "write_table", "read_points"]

_HEADER = re.compile(r"#\s*rows=(\d+)\s+cols=(\d+)(?:\s+pstar=(\S+))?")


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_matrix(path: str | Path, M, pstar: float | None = None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    ps = "nan" if pstar is None else fmt(pstar)
    lines = [f"# rows={M.shape[0]} cols={M.shape[1]} pstar={ps}"]
    lines += [",".join(fmt(v) for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path: str | Path) -> tuple[np.ndarray, float | None]:
    """Matrix and its recorded p* (None when absent or nan)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    rows, shape, pstar = [], None, None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m:
                shape = (int(m.group(1)), int(m.group(2)))
                if m.group(3) and m.group(3) != "nan":
                    pstar = float(m.group(3))
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise ConfigError(f"non-numeric entry in {path}: {line!r}") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{path} is empty or ragged")
    M = np.array(rows)
    if shape is not None and M.shape != shape:
        raise ConfigError(f"{path}: header says {shape}, data is {M.shape}")
    return M, pstar


def write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(out) + "\n")


def read_points(path: str | Path, ncols: int = 2) -> np.ndarray:
    """Numeric rows of a CSV; comment lines and a non-numeric header are skipped."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    pts = []
    for k, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals = [float(v) for v in line.split(",")]
        except ValueError:
            if k == 0 or not pts:
                continue
            raise ConfigError(f"non-numeric row in {path}: {line!r}") from None
        if len(vals) < ncols:
            raise ConfigError(f"{path}: expected {ncols} columns, got {line!r}")
        pts.append(vals[:ncols])
    return np.array(pts, dtype=float).reshape(-1, ncols)
