"""Bit-exact binary field files and deterministic CSV output.

Field file layout (all little-endian):

    bytes 0-7    magic "FNPFLD01"
    bytes 8-19   u32 nx, ny, nz
    bytes 20-23  u32 component count (1 scalar, 3 vector)
    bytes 24-47  f64 origin (x, y, z)
    bytes 48-55  f64 spacing
    bytes 56-    components concatenated, each row-major (x outer, z inner) f64

CSV files use '.' decimals and 17 significant digits, so a written value
rereads to the same double and identical runs produce identical bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .grid import Grid3, ScalarField, VectorField

MAGIC = b"FNPFLD01"
_HEADER = struct.Struct("<8s4I4d")
_MAX_CELLS = 2**31  # refuse absurd headers before allocating


def write_field(path, field) -> None:
    if isinstance(field, ScalarField):
        ncomp, payload = 1, field.values[None]
    elif isinstance(field, VectorField):
        ncomp, payload = 3, field.components
    else:
        raise FormatError(f"cannot serialize {type(field).__name__}")
    g = field.grid
    header = _HEADER.pack(MAGIC, *g.dims, ncomp, *g.origin, g.spacing)
    with open(path, "wb") as fh:
        fh.write(header)
        for c in range(ncomp):
            fh.write(np.ascontiguousarray(payload[c], dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(
            f"truncated header: need {_HEADER.size} bytes, file ends at byte {len(data)}")
    magic, nx, ny, nz, ncomp, ox, oy, oz, h = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte 0 (expected {MAGIC!r})")
    if ncomp not in (1, 3):
        raise FormatError(f"bad component count {ncomp} at byte 20")
    ncells = nx * ny * nz
    if min(nx, ny, nz) < 2 or ncells > _MAX_CELLS:
        raise FormatError(f"bad dimensions ({nx}, {ny}, {nz}) at byte 8")
    expected = _HEADER.size + 8 * ncomp * ncells
    if len(data) != expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, file ends at byte {len(data)}")
    grid = Grid3(origin=(ox, oy, oz), spacing=h, dims=(nx, ny, nz))
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    arr = arr.reshape((ncomp, nx, ny, nz))
    if ncomp == 1:
        return ScalarField(grid, arr[0])
    return VectorField(grid, arr)


def format_value(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, columns, rows) -> None:
    """rows: iterable of dicts keyed by column name."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
