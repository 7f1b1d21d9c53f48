"""Grid fields and their binary / CSV layouts.

Binary layout, all little-endian::

    int64    dim
    int64    shape[dim]
    float64  h
    float64  lo[dim]
    float64  hi[dim]
    float64  values[prod(shape)]     # row-major over the full grid

Nodes that are not interior are written as 0.
"""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass
class ScalarField:
    """Values at the interior nodes of ``grid`` (zero everywhere else)."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise ParameterError(f"expected {self.grid.size} interior values, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("field values must be finite")

    def full(self):
        return self.grid.to_full(self.values)

    def sup_norm(self):
        return float(np.abs(self.values).max(initial=0.0))


@dataclass
class GridSnapshot:
    """What :func:`read_binary` recovers from a file."""

    dim: int
    shape: tuple
    h: float
    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray


def write_binary(field, path):
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", g.dim))
        fh.write(struct.pack(f"<{g.dim}q", *g.shape))
        fh.write(struct.pack("<d", g.h))
        fh.write(np.asarray(g.lo, dtype="<f8").tobytes())
        fh.write(np.asarray(g.hi, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(field.full(), dtype="<f8").tobytes(order="C"))


def read_binary(path):
    with open(path, "rb") as fh:
        data = fh.read()
    (dim,) = struct.unpack_from("<q", data, 0)
    off = 8
    shape = struct.unpack_from(f"<{dim}q", data, off)
    off += 8 * dim
    (h,) = struct.unpack_from("<d", data, off)
    off += 8
    lo = np.frombuffer(data, dtype="<f8", count=dim, offset=off)
    off += 8 * dim
    hi = np.frombuffer(data, dtype="<f8", count=dim, offset=off)
    off += 8 * dim
    count = int(np.prod(shape))
    if len(data) != off + 8 * count:
        raise ParameterError(f"{path}: expected {off + 8 * count} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape)
    return GridSnapshot(dim, tuple(shape), h, lo.copy(), hi.copy(), values.copy())


def write_csv(field, path):
    """One row per grid node: coordinates, interior flag, value."""
    g = field.grid
    full = field.full().ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(g.dim)] + ["interior", "value"])
        for p, inside, v in zip(g.points, g.inside, full):
            w.writerow([f"{c:.17g}" for c in p] + [int(inside), f"{v:.17g}"])
