"""Tests for the binary field format."""

import numpy as np
import pytest

from scatterlab.errors import FieldFormatError
from scatterlab.fieldio import RECORD_SIZE, decode_field, encode_field, has_field_header, read_field, write_field
from scatterlab.grid import Grid1D, WaveField


def _field(grid: Grid1D, modes: int = 2) -> WaveField:
    rng = np.random.default_rng(1)
    return WaveField(grid, rng.normal(size=(grid.n, modes)) + 1j * rng.normal(size=(grid.n, modes)))


def test_has_field_header():
    """Test header detection."""
    assert not has_field_header(b"Just some content")
    assert not has_field_header(b"SCATWF01")  # too short
    assert has_field_header(b"SCATWF01" + b"\x00" * 40)
    assert not has_field_header(b"SCATWF02" + b"\x00" * 40)


def test_encode_layout():
    """Test record size and header fields."""
    u = _field(Grid1D.half_line(5.0, 11), modes=3)
    data = encode_field(u)
    assert len(data) == RECORD_SIZE + 16 * 11 * 3
    assert data[:8] == b"SCATWF01"
    assert data[8] == 0
    assert int.from_bytes(data[16:24], "little") == 11
    assert int.from_bytes(data[24:32], "little") == 3


def test_decode_preserves_values_and_grid():
    """Test a full-line field survives encoding bit for bit."""
    u = _field(Grid1D.full_line(8.0, 64))
    back = decode_field(encode_field(u))
    assert back.grid == u.grid
    assert np.array_equal(back.values, u.values)


def test_decode_rejects_truncated():
    """Test size mismatches are reported."""
    data = encode_field(_field(Grid1D.half_line(5.0, 11)))
    with pytest.raises(FieldFormatError):
        decode_field(data[:-16])


def test_decode_rejects_bad_kind():
    """Test unknown grid kinds are reported."""
    data = bytearray(encode_field(_field(Grid1D.half_line(5.0, 11))))
    data[8] = 7
    with pytest.raises(FieldFormatError):
        decode_field(bytes(data))


def test_decode_rejects_missing_header():
    """Test data without magic is rejected."""
    with pytest.raises(FieldFormatError):
        decode_field(b"\x00" * 100)


def test_write_and_read(tmp_path):
    """Test files on disk."""
    u = _field(Grid1D.half_line(5.0, 11))
    path = write_field(tmp_path / "u.bin", u)
    assert path.stat().st_size == RECORD_SIZE + 16 * 11 * 2
    back = read_field(path)
    assert np.array_equal(back.values, u.values)
