"""Path CSV and noise-field binary formats."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import FracflowError
from .kernels import HurstParams
from .synthesis import FbmPath, NoiseField

FNF_MAGIC = b"FNF1"
_FNF_HEADER = struct.Struct("<4sQddI")


def write_path_csv(path: FbmPath, dest) -> None:
    """Write ``time,dim0,dim1,...`` with shortest round-trip decimals."""
    if path.batched:
        raise FracflowError("SHAPE", "write one draw at a time (use FbmPath.select)")
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"dim{k}" for k in range(path.d)])
        for j, t in enumerate(path.times):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in path.values[:, j]])


def read_path_csv(src, params: HurstParams, method: str = "csv") -> FbmPath:
    """Inverse of :func:`write_path_csv`."""
    try:
        with open(src, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FracflowError("IO", str(exc)) from exc
    if not rows or not rows[0] or rows[0][0] != "time" or len(rows) < 2:
        raise FracflowError("IO", f"{src}: expected a 'time,dim0,...' header and data rows")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return FbmPath(data[:, 0], data[:, 1:].T.copy(), params, method)


def save_noise(noise: NoiseField, dest) -> None:
    """``FNF1`` block: u64 seed, f64 R, f64 h, u32 d, then f64 increments row-major."""
    body = np.ascontiguousarray(noise.increments, dtype="<f8").tobytes()
    Path(dest).write_bytes(_FNF_HEADER.pack(FNF_MAGIC, noise.seed & (2**64 - 1), noise.R, noise.h, noise.d) + body)


def load_noise(src) -> NoiseField:
    try:
        raw = Path(src).read_bytes()
    except OSError as exc:
        raise FracflowError("IO", str(exc)) from exc
    if len(raw) < _FNF_HEADER.size:
        raise FracflowError("IO", "truncated noise file")
    magic, seed, R, h, d = _FNF_HEADER.unpack_from(raw)
    if magic != FNF_MAGIC:
        raise FracflowError("IO", "bad magic, not an FNF1 noise file")
    inc = np.frombuffer(raw, dtype="<f8", offset=_FNF_HEADER.size)
    m = int(round(2.0 * R / h))
    if inc.size != d * m:
        raise FracflowError("IO", "noise payload size does not match header")
    return NoiseField(seed, R, h, inc.reshape(d, m).astype(float))
