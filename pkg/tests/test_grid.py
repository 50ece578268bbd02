"""Tests for grids, wave fields and the Fourier transform."""

import numpy as np
import pytest

from scatterlab.errors import DimensionMismatch, GridMismatch
from scatterlab.grid import Grid1D, WaveField, fourier, inverse_fourier, momentum_filter


def test_half_line_grid():
    """Test half-line spacing and interior unknowns."""
    grid = Grid1D.half_line(10.0, 101)
    assert grid.h == pytest.approx(0.1)
    assert grid.n_active == 99
    assert grid.r_active[0] == pytest.approx(0.1)
    assert grid.r_active[-1] == pytest.approx(9.9)


def test_reference_grid_shares_spacing():
    """Test the reference grid covers [−r_max, r_max) with the same h."""
    half = Grid1D.half_line(10.0, 101)
    full = Grid1D.reference_for(half)
    assert full.n == 200
    assert full.h == pytest.approx(half.h)
    assert full.r[full.origin_index] == pytest.approx(0.0)
    assert full.origin_index == 100


def test_grid_rejects_degenerate():
    """Test degenerate grids are rejected."""
    with pytest.raises(ValueError):
        Grid1D.half_line(10.0, 2)
    with pytest.raises(ValueError):
        Grid1D(1.0, 10.0, 50)


def test_origin_index_requires_zero():
    """Test grids without r = 0 have no origin index."""
    grid = Grid1D(-10.05, 9.95, 100, "full_line_periodic")
    with pytest.raises(GridMismatch):
        grid.origin_index


def test_wavefield_dirichlet_ends():
    """Test half-line fields vanish at both endpoints."""
    grid = Grid1D.half_line(1.0, 11)
    u = WaveField(grid, np.ones(11))
    assert u.values[0, 0] == 0.0
    assert u.values[-1, 0] == 0.0
    assert u.norm() == pytest.approx(np.sqrt(0.9))


def test_wavefield_vector_layout():
    """Test the flattened index is i_r·modes + j."""
    grid = Grid1D.half_line(1.0, 6)
    values = np.zeros((6, 3), dtype=complex)
    values[2, 1] = 1.0
    u = WaveField(grid, values)
    vec = u.vector()
    assert vec.shape == (12,)
    assert vec[1 * 3 + 1] == 1.0
    assert WaveField.from_vector(grid, 3, vec).inner(u) == pytest.approx(grid.h)


def test_wavefield_shape_check():
    """Test values must fit the grid."""
    grid = Grid1D.half_line(1.0, 11)
    with pytest.raises(DimensionMismatch):
        WaveField(grid, np.ones(10))
    with pytest.raises(DimensionMismatch):
        WaveField.zeros(grid, 1) + WaveField.zeros(grid, 2)


def test_wavefield_arithmetic_and_modes():
    """Test linear operations and mode restriction."""
    grid = Grid1D.half_line(1.0, 11)
    values = np.zeros((11, 2), dtype=complex)
    values[1:-1, 0] = 1.0
    values[1:-1, 1] = 2.0
    u = WaveField(grid, values)
    assert (u - u).norm() == 0.0
    assert (2 * u).norm() == pytest.approx(2 * u.norm())
    assert u.mode(1).mode_norms()[0] == 0.0
    assert u.mode_norms()[1] == pytest.approx(2 * u.mode_norms()[0])
    assert u.normalized().norm() == pytest.approx(1.0)


def test_fourier_of_gaussian():
    """Test the transform of e^(−r²/2) is e^(−ρ²/2)."""
    grid = Grid1D.full_line(40.0, 512)
    u = WaveField(grid, np.exp(-grid.r**2 / 2))
    uh = fourier(u)
    assert np.max(np.abs(uh.values[:, 0] - np.exp(-grid.rho**2 / 2))) < 1e-10
    assert uh.norm() == pytest.approx(u.norm(), rel=1e-12)


def test_fourier_inverse():
    """Test the inverse transform recovers the field."""
    grid = Grid1D.full_line(20.0, 256)
    rng = np.random.default_rng(0)
    u = WaveField(grid, rng.normal(size=(256, 2)) + 1j * rng.normal(size=(256, 2)))
    back = inverse_fourier(fourier(u))
    assert np.max(np.abs(back.values - u.values)) < 1e-12


def test_momentum_of_plane_wave_packet():
    """Test a modulated Gaussian has its momentum at the carrier."""
    grid = Grid1D.full_line(50.0, 1024)
    u = WaveField(grid, np.exp(1.5j * grid.r - grid.r**2 / 8))
    uh = fourier(u)
    assert uh.mean_momentum() == pytest.approx(1.5, abs=1e-8)
    assert uh.momentum_spread() == pytest.approx(np.sqrt(1 / 8), rel=1e-6)


def test_momentum_filter():
    """Test a sign multiplier keeps only positive momenta."""
    grid = Grid1D.full_line(50.0, 1024)
    u = WaveField(grid, np.exp(3.0j * grid.r - grid.r**2 / 8))
    kept = momentum_filter(u, (grid.rho > 0).astype(float))
    assert kept.norm() == pytest.approx(u.norm(), rel=1e-8)
    dropped = momentum_filter(u, (grid.rho < 0).astype(float))
    assert dropped.norm() < 1e-6


def test_fourier_needs_full_line():
    """Test half-line fields have no momentum representation."""
    grid = Grid1D.half_line(10.0, 101)
    with pytest.raises(GridMismatch):
        fourier(WaveField.zeros(grid))
