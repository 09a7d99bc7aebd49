"""
FNSS binary snapshots of spectral coefficients.

Layout (all little-endian)::

    b"FNSS"                      4-byte magic
    version                      u32 (currently 1)
    d, n, components             u32 each
    s, eps, t                    binary64 each
    coefficients                 binary64 pairs (re, im)

Coefficients are written component by component, each in row-major order
over the lattice ``k in {-n/2, ..., n/2 - 1}^d`` (most negative frequency
first). Version 1 means the coefficient normalization
``f_hat(k) = (V / N) * sum_x f(x) exp(-i k.x)`` on a box of side ``2 pi``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import Grid

MAGIC = b"FNSS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIddd")


@dataclass(frozen=True)
class Snapshot:
    grid: Grid
    coeffs: np.ndarray  # (components, n, ..., n) in FFT order
    s: float
    eps: float
    t: float


def encode(snap: Snapshot) -> bytes:
    g = snap.grid
    c = np.asarray(snap.coeffs, dtype=complex)
    if c.shape[1:] != g.shape:
        raise ValueError("coefficient shape does not match the grid")
    header = _HEADER.pack(MAGIC, VERSION, g.d, g.n, c.shape[0], snap.s, snap.eps, snap.t)
    ordered = np.fft.fftshift(c, axes=g.axes)
    return header + np.ascontiguousarray(ordered).astype("<c16").tobytes()


def decode(data: bytes, box_length: float | None = None) -> Snapshot:
    if len(data) < _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, version, d, n, ncomp, s, eps, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid = Grid(d, n) if box_length is None else Grid(d, n, box_length)
    count = ncomp * n**d
    body = data[_HEADER.size :]
    if len(body) != 16 * count:
        raise ValueError(f"expected {16 * count} coefficient bytes, found {len(body)}")
    ordered = np.frombuffer(body, dtype="<c16").reshape((ncomp,) + grid.shape)
    coeffs = np.fft.ifftshift(ordered, axes=grid.axes).astype(complex)
    return Snapshot(grid, coeffs, s, eps, t)


def write_snapshot(path: str | Path, snap: Snapshot) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode(snap))
    return path


def read_snapshot(path: str | Path) -> Snapshot:
    return decode(Path(path).read_bytes())
