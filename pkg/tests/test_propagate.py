"""Tests for time evolution and wave packets."""

import numpy as np
import pytest

from scatterlab.assemble import DiscreteOperator, assemble_L0, assemble_reference
from scatterlab.errors import BoundaryLeak, GridMismatch, PacketClipped, StepTooLarge
from scatterlab.grid import Grid1D, WaveField, fourier
from scatterlab.model import CrossSection, ScalingFunction
from scatterlab.propagate import (
    boundary_mass,
    evolve,
    evolve_trajectory,
    iter_evolution,
    make_packet,
    project_sign,
    taper,
)

K = ScalingFunction.power(1.0)


def _position_moments(u):
    weight = u.grid.h * np.abs(u.values[:, 0]) ** 2
    mean = np.sum(u.grid.r * weight) / np.sum(weight)
    return mean, np.sqrt(np.sum((u.grid.r - mean) ** 2 * weight) / np.sum(weight))


def _free_continuum(grid: Grid1D) -> DiscreteOperator:
    """−∂² with the continuum symbol ρ²."""
    H0 = assemble_reference(grid, K, CrossSection(0), "H0")
    return DiscreteOperator(H0.matrix, grid, 1, True, "free", grid.rho**2)


def test_zero_time_is_identity():
    """Test t = 0 returns the input."""
    grid = Grid1D.half_line(40.0, 401)
    L0 = assemble_L0(grid, K, CrossSection(0))
    u = make_packet(20.0, 1.0, 2.0, grid)
    assert evolve(L0, u, 0.0) is u


def test_free_gaussian_spreading():
    """Test the free packet moves at speed 2ρ0 and spreads as w√(1 + t²/w⁴)."""
    grid = Grid1D.full_line(100.0, 2048)
    H = _free_continuum(grid)
    u = make_packet(-20.0, 1.0, 2.0, grid)
    mean, std = _position_moments(evolve(H, u, 10.0))
    assert mean == pytest.approx(0.0, abs=1e-8)
    assert std == pytest.approx(2.0 * np.sqrt(1.0 + 100.0 / 16.0), rel=1e-8)


def test_crank_nicolson_matches_exact_multiplier():
    """Test CN on the periodic stencil against its exact symbol."""
    grid = Grid1D.full_line(40.0, 800)
    H0 = assemble_reference(grid, K, CrossSection(0), "H0")
    stencil = DiscreteOperator(H0.matrix, grid, 1, True, "stencil")
    u = make_packet(0.0, 1.0, 3.0, grid)
    assert (evolve(stencil, u, 2.0) - evolve(H0, u, 2.0)).norm() < 1e-4


def test_crank_nicolson_is_unitary():
    """Test the norm is preserved on the half-line."""
    grid = Grid1D.half_line(60.0, 601)
    L0 = assemble_L0(grid, K, CrossSection(1))
    u = make_packet(30.0, 1.0, 3.0, grid, L0.modes, 2)
    assert evolve(L0, u, 3.0).norm() == pytest.approx(1.0, abs=1e-12)
    assert evolve(L0, u, -3.0).norm() == pytest.approx(1.0, abs=1e-12)


def test_backward_undoes_forward():
    """Test e^{itH}e^{−itH} = 1."""
    grid = Grid1D.half_line(60.0, 601)
    L0 = assemble_L0(grid, K, CrossSection(0))
    u = make_packet(30.0, 1.0, 3.0, grid)
    back = evolve(L0, evolve(L0, u, 2.0), -2.0)
    assert (back - u).norm() < 1e-10


def test_boundary_leak():
    """Test a packet reaching the end of the box stops the evolution."""
    grid = Grid1D.half_line(40.0, 401)
    L0 = assemble_L0(grid, K, CrossSection(0))
    u = make_packet(28.0, 2.0, 1.5, grid)
    with pytest.raises(BoundaryLeak):
        evolve(L0, u, 10.0)


def test_step_too_large():
    """Test the step guard on dt·‖Hu‖/‖u‖."""
    grid = Grid1D.half_line(40.0, 401)
    L0 = assemble_L0(grid, K, CrossSection(0))
    u = make_packet(20.0, 2.0, 2.0, grid)
    with pytest.raises(StepTooLarge):
        evolve(L0, u, 5.0, dt=1.0)


def test_grid_mismatch():
    """Test the field must live on the operator's grid."""
    L0 = assemble_L0(Grid1D.half_line(40.0, 401), K, CrossSection(0))
    u = make_packet(20.0, 1.0, 2.0, Grid1D.half_line(40.0, 201))
    with pytest.raises(GridMismatch):
        evolve(L0, u, 1.0)


def test_trajectory_composes():
    """Test snapshots chain to the single-shot evolution."""
    grid = Grid1D.full_line(60.0, 1024)
    H = _free_continuum(grid)
    u = make_packet(-10.0, 1.0, 2.0, grid)
    snaps = evolve_trajectory(H, u, 6.0, 4)
    assert [t for t, _ in snaps] == pytest.approx([0.0, 2.0, 4.0, 6.0])
    assert snaps[0][1] is u
    assert (snaps[-1][1] - evolve(H, u, 6.0)).norm() < 1e-12
    times = [t for t, _ in iter_evolution(H, u, [1.0, 3.0])]
    assert times == [1.0, 3.0]


def test_make_packet():
    """Test normalization, the mode column and the clipping guard."""
    grid = Grid1D.half_line(40.0, 401)
    u = make_packet(20.0, 1.0, 2.0, grid, modes=3, mode=0)
    assert u.norm() == pytest.approx(1.0)
    assert u.mode_norms()[0] == pytest.approx(1.0)
    assert make_packet(20.0, 1.0, 2.0, grid, modes=3).mode_norms()[1] == pytest.approx(1.0)
    with pytest.raises(PacketClipped):
        make_packet(3.0, 1.0, 2.0, grid)
    with pytest.raises(ValueError):
        make_packet(20.0, 1.0, 0.0, grid)


def test_project_sign():
    """Test the two sign projections split the field."""
    grid = Grid1D.full_line(50.0, 1024)
    u = make_packet(0.0, 0.3, 2.0, grid)
    plus, minus = project_sign(u, 1), project_sign(u, -1)
    assert (plus + minus - u).norm() < 1e-12
    assert np.max(np.abs(fourier(plus).values[grid.rho < 0])) < 1e-12
    assert plus.norm() > minus.norm()


def test_boundary_mass():
    """Test mass near the ends is measured."""
    grid = Grid1D.half_line(40.0, 401)
    assert boundary_mass(make_packet(20.0, 1.0, 2.0, grid)) < 1e-20
    values = np.zeros(grid.n)
    values[-6:] = 1.0
    assert boundary_mass(WaveField(grid, values)) == pytest.approx(5 * grid.h)


def test_stationary_state_evolves_freely():
    """Test a box eigenvector with mass at the wall is not reported as a leak."""
    grid = Grid1D.half_line(40.0, 401)
    L0 = assemble_L0(grid, K, CrossSection(0))
    u = WaveField(grid, np.sin(20 * np.pi * np.arange(grid.n) / (grid.n - 1))).normalized()
    assert boundary_mass(u) > 1e-3
    out = evolve(L0, u, 2.0)
    assert abs(out.inner(u)) == pytest.approx(1.0, abs=1e-8)
    snaps = evolve_trajectory(L0, u, 2.0, 3)
    assert boundary_mass(snaps[-1][1]) == pytest.approx(boundary_mass(u), rel=1e-6)


def test_taper():
    """Test the cutoff keeps [lo, hi] and removes everything beyond the ramps."""
    grid = Grid1D.full_line(50.0, 1000)
    u = WaveField(grid, np.ones(grid.n))
    cut = taper(u, -10.0, 10.0, 5.0)
    inside = np.abs(grid.r) <= 10.0
    outside = np.abs(grid.r) >= 15.0
    assert np.allclose(cut.values[inside, 0], 1.0)
    assert np.all(cut.values[outside, 0] == 0.0)
    assert boundary_mass(cut) == 0.0
    with pytest.raises(ValueError):
        taper(u, -10.0, 10.0, 0.0)
