"""WaveField binary format.

A field file is a 16-byte header followed by a fixed-size record and the values:

    offset  size  content
    0       6     magic "SCATWF"
    6       2     version "01"
    8       1     grid kind (0 = half-line, 1 = full-line)
    9       7     reserved, zero
    16      8     n (u64, little-endian)
    24      8     modes (u64, little-endian)
    32      8     r_min (f64, little-endian)
    40      8     r_max (f64, little-endian)
    48      16·n·modes  values, complex128 little-endian, row-major (n, modes)

This module provides:
- Detection: has_field_header()
- Encoding: encode_field() / decode_field()
- Files: write_field() / read_field()
"""

from pathlib import Path

import numpy as np

from .errors import FieldFormatError
from .grid import FULL_LINE, HALF_LINE, Grid1D, WaveField

MAGIC = b"SCATWF"
VERSION = b"01"
HEADER_SIZE = 16
RECORD_SIZE = 48

_KINDS = {HALF_LINE: 0, FULL_LINE: 1}


def has_field_header(data: bytes) -> bool:
    """Check if data starts with a field header.

    Args:
        data: Raw file bytes

    Returns:
        True if magic and version match
    """
    return len(data) >= RECORD_SIZE and data[0:6] == MAGIC and data[6:8] == VERSION


def encode_field(field: WaveField) -> bytes:
    """Serialize a field.

    Args:
        field: Field to encode

    Returns:
        Header, record and values as bytes

    Examples:
        >>> data = encode_field(u)
        >>> len(data) == 48 + 16 * u.grid.n * u.modes
        True
    """
    grid = field.grid
    header = bytearray(RECORD_SIZE)

    header[0:6] = MAGIC
    header[6:8] = VERSION
    header[8] = _KINDS[grid.kind]
    # bytes 9..15 reserved

    header[16:24] = grid.n.to_bytes(8, byteorder="little")
    header[24:32] = field.modes.to_bytes(8, byteorder="little")
    header[32:48] = np.array([grid.r_min, grid.r_max], dtype="<f8").tobytes()

    return bytes(header) + np.ascontiguousarray(field.values, dtype="<c16").tobytes()


def decode_field(data: bytes) -> WaveField:
    """Deserialize a field written by encode_field().

    Raises:
        FieldFormatError: bad magic, unknown kind, or size mismatch
    """
    if not has_field_header(data):
        raise FieldFormatError("missing SCATWF header")

    kinds = {code: kind for kind, code in _KINDS.items()}
    if data[8] not in kinds:
        raise FieldFormatError(f"unknown grid kind byte {data[8]}")

    n = int.from_bytes(data[16:24], byteorder="little")
    modes = int.from_bytes(data[24:32], byteorder="little")
    r_min, r_max = np.frombuffer(data[32:48], dtype="<f8")

    expected = RECORD_SIZE + 16 * n * modes
    if len(data) != expected:
        raise FieldFormatError(f"expected {expected} bytes for {n}×{modes} values, got {len(data)}")

    grid = Grid1D(float(r_min), float(r_max), n, kinds[data[8]])
    values = np.frombuffer(data[RECORD_SIZE:], dtype="<c16").reshape(n, modes)
    return WaveField(grid, values)


def write_field(path: Path | str, field: WaveField) -> Path:
    path = Path(path)
    path.write_bytes(encode_field(field))
    return path


def read_field(path: Path | str) -> WaveField:
    return decode_field(Path(path).read_bytes())
