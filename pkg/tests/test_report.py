"""Tests for result files."""

import math

import numpy as np
import pytest

from scatterlab.assemble import assemble_L0
from scatterlab.fieldio import read_field
from scatterlab.grid import Grid1D
from scatterlab.model import CrossSection, ScalingFunction
from scatterlab.pdo import Symbol
from scatterlab.propagate import make_packet
from scatterlab.report import (
    jsonable,
    read_curve,
    read_summary,
    symbol_rows,
    write_cook_result,
    write_curve,
    write_phase_table,
    write_summary,
    write_trajectory,
)
from scatterlab.scattering import IdentityIdentifier, cook_wave_operator


def test_jsonable():
    """Test numpy scalars are unwrapped and non-finite floats become null."""
    value = {"a": np.float64(1.5), "b": [np.int64(3), np.bool_(True)], 4: (math.inf, math.nan)}
    assert jsonable(value) == {"a": 1.5, "b": [3, True], "4": [None, None]}
    assert type(jsonable(np.int32(2))) is int


def test_summary_roundtrip(tmp_path):
    """Test summaries are read back from a file or a run directory."""
    write_summary(tmp_path / "summary.json", {"status": "PASS", "results": {"C": np.float64(2.0)}})
    assert read_summary(tmp_path) == {"status": "PASS", "results": {"C": 2.0}}
    assert read_summary(tmp_path / "summary.json")["status"] == "PASS"


def test_curve_keeps_full_precision(tmp_path):
    """Test floats survive the CSV at full precision."""
    path = write_curve(tmp_path / "curves" / "lap.csv", ["eta", "bound"], [(0.1, 1.0 / 3.0), (0.05, 2)])
    header, rows = read_curve(path)
    assert header == ["eta", "bound"]
    assert rows[0][1] == 1.0 / 3.0
    assert rows[1] == [0.05, 2.0]


def test_phase_table_header(tmp_path):
    """Test the phase table columns."""
    header, rows = read_curve(write_phase_table(tmp_path / "phase.csv", [(1.0, 0.5, 0.1, 0.2, 0.3)]))
    assert header == ["r", "rho", "phi", "dr_phi", "remainder"]
    assert len(rows) == 1


def test_symbol_rows():
    """Test symbols are sampled on the tensor grid with real and imaginary parts."""
    symbol = Symbol(lambda r, rho: r + 1j * rho)
    rows = symbol_rows(symbol, [1.0, 2.0], [0.5, 1.0, 1.5])
    assert len(rows) == 6
    assert rows[1] == pytest.approx((1.0, 1.0, 1.0, 1.0))
    assert rows[-1] == pytest.approx((2.0, 1.5, 2.0, 1.5))


def test_write_cook_result(tmp_path):
    """Test the integrand trace, the limit field and the summary entry."""
    grid = Grid1D.half_line(40.0, 201)
    L0 = assemble_L0(grid, ScalingFunction.power(1.0), CrossSection(0))
    u = make_packet(20.0, 1.0, 3.0, grid)
    result = cook_wave_operator(L0, L0, IdentityIdentifier(), u, T_max=1.0)

    entry = write_cook_result(tmp_path, "forward", result, u)
    assert entry["converged"] is True
    assert entry["norm_in"] == pytest.approx(1.0)
    assert entry["isometry_defect"] < 1e-12

    header, rows = read_curve(tmp_path / "curves" / "forward_integrand.csv")
    assert header == ["t", "integrand"]
    assert len(rows) == len(result.integrand_samples)
    assert np.array_equal(read_field(tmp_path / "fields" / "forward.bin").values, result.w.values)


def test_write_trajectory(tmp_path):
    """Test snapshots and their time sidecar."""
    grid = Grid1D.half_line(40.0, 201)
    u = make_packet(20.0, 1.0, 3.0, grid)
    write_trajectory(tmp_path, "trajectory", [(0.0, u), (2.5, u * 2.0)])

    with (tmp_path / "curves" / "trajectory_times.csv").open() as handle:
        lines = handle.read().splitlines()
    assert lines[0] == "index,t,file"
    assert lines[2] == "1,2.5,trajectory_0001.bin"
    assert read_field(tmp_path / "fields" / "trajectory_0001.bin").norm() == pytest.approx(2.0)
