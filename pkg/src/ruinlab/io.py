"""CSV and binary tabulation formats.

CSV dialect: comma separated, header row, LF line endings, floats written
with 17 significant digits so files round-trip bit-exactly.

Binary grid layout (little endian)::

    magic   8 bytes  b"RLGRID01"
    ndim    uint64   number of axes (2)
    shape   ndim x uint64
    axes    for each axis, shape[i] x float64
    values  prod(shape) x float64, row-major (C order)
    errors  prod(shape) x float64, row-major
"""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAGIC = b"RLGRID01"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]


def write_grid_binary(path, axes: Sequence[np.ndarray], values: np.ndarray, errors: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(values, dtype="<f8")
    errors = np.ascontiguousarray(errors, dtype="<f8")
    shape = tuple(len(a) for a in axes)
    if values.shape != shape or errors.shape != shape:
        raise ValueError(f"values/errors shape must be {shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(shape)))
        fh.write(struct.pack(f"<{len(shape)}Q", *shape))
        for a in axes:
            fh.write(np.asarray(a, dtype="<f8").tobytes())
        fh.write(values.tobytes())
        fh.write(errors.tobytes())
    return path


def read_grid_binary(path):
    """Returns ``(axes, values, errors)``."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a ruinlab grid file")
    (ndim,) = struct.unpack_from("<Q", data, 8)
    shape = struct.unpack_from(f"<{ndim}Q", data, 16)
    offset = 16 + 8 * ndim
    axes = []
    for n in shape:
        axes.append(np.frombuffer(data, "<f8", n, offset).copy())
        offset += 8 * n
    size = int(np.prod(shape))
    values = np.frombuffer(data, "<f8", size, offset).reshape(shape).copy()
    offset += 8 * size
    errors = np.frombuffer(data, "<f8", size, offset).reshape(shape).copy()
    return axes, values, errors
