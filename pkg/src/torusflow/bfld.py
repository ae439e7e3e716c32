"""Reader and writer for the BFLD binary field format.

Layout::

    b"BFLD1\\n"
    b"<dim> <n_per_axis> <length>\\n"      (ASCII)
    n_per_axis**dim little-endian float64 samples, row-major
"""

from __future__ import annotations

import os

import numpy as np

from .fourier_core import GridError, PeriodicGrid, PhysicalField

MAGIC = b"BFLD1\n"


class BFLDFormatError(ValueError):
    """Malformed BFLD data; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def dumps(f: PhysicalField) -> bytes:
    g = f.grid
    header = f"{g.dim} {g.n_per_axis} {g.length!r}\n".encode("ascii")
    body = np.ascontiguousarray(f.samples, dtype="<f8").tobytes()
    return MAGIC + header + body


def loads(data: bytes) -> PhysicalField:
    if not data.startswith(MAGIC):
        bad = next(
            (i for i, (a, b) in enumerate(zip(data, MAGIC)) if a != b),
            min(len(data), len(MAGIC)),
        )
        raise BFLDFormatError("missing BFLD1 magic", bad)
    start = len(MAGIC)
    end = data.find(b"\n", start)
    if end < 0:
        raise BFLDFormatError("unterminated header line", len(data))
    try:
        parts = data[start:end].decode("ascii").split()
        if len(parts) != 3:
            raise ValueError
        dim, n, length = int(parts[0]), int(parts[1]), float(parts[2])
    except (ValueError, UnicodeDecodeError):
        raise BFLDFormatError("header must be '<dim> <n> <length>'", start) from None
    try:
        grid = PeriodicGrid(dim, n, length)
    except GridError as exc:
        raise BFLDFormatError(f"invalid grid: {exc}", start) from None
    body_start = end + 1
    expected = 8 * n**dim
    body = data[body_start:]
    if len(body) != expected:
        raise BFLDFormatError(
            f"expected {expected} payload bytes, found {len(body)}",
            body_start + min(len(body), expected),
        )
    samples = np.frombuffer(body, dtype="<f8").astype(float)
    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        raise BFLDFormatError("non-finite sample", body_start + 8 * int(bad[0]))
    return PhysicalField(grid, samples.reshape(grid.shape))


def write(path: str | os.PathLike, f: PhysicalField) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(f))


def read(path: str | os.PathLike) -> PhysicalField:
    with open(path, "rb") as fh:
        return loads(fh.read())
