"""Tests for the spectral diagnostics."""

import numpy as np
import pytest
import scipy.sparse as sp

from scatterlab.assemble import DiscreteOperator, assemble_A, assemble_L0, assemble_M, assemble_weight
from scatterlab.diagnostics import (
    FAIL,
    PASS,
    embedded_eigen_scan,
    kato_smoothness_integral,
    kato_smoothness_integrals,
    lap_resolvent_sup,
    mourre_form_check,
    radiation_inequality_check,
    to_banded,
    window_eigenpairs,
)
from scatterlab.errors import DenseLimitExceeded, NoFiniteC, ResolutionFloor, WindowTouchesThreshold
from scatterlab.grid import Grid1D, WaveField
from scatterlab.model import CrossSection, CutoffSpec, ScalingFunction, SpectralWindow
from scatterlab.propagate import make_packet

K = ScalingFunction.power(1.0)


def _trap(grid: Grid1D) -> DiscreteOperator:
    """Free operator plus a tall barrier on [5, 6]: one quasi-bound state per inner level."""
    L0 = assemble_L0(grid, K, CrossSection(0))
    r = grid.r_active
    barrier = 200.0 * ((r >= 5.0) & (r <= 6.0))
    return DiscreteOperator(L0.matrix + sp.diags(barrier), grid, 1, True, "trap")


def test_to_banded():
    """Test banded storage of a tridiagonal matrix."""
    grid = Grid1D.half_line(10.0, 51)
    L0 = assemble_L0(grid, K, CrossSection(0))
    ab = to_banded(L0.matrix)
    assert ab.shape == (2, grid.n_active)
    assert np.allclose(ab[0], L0.matrix.diagonal())
    assert np.allclose(ab[1, :-1], L0.matrix.diagonal(-1))


def test_window_eigenpairs():
    """Test the window selection against the Dirichlet stencil spectrum."""
    grid = Grid1D.half_line(10.0, 51)
    L0 = assemble_L0(grid, K, CrossSection(0))
    n = grid.n_active
    exact = 4.0 / grid.h**2 * np.sin(np.arange(1, n + 1) * np.pi / (2 * (n + 1))) ** 2
    energies, vectors = window_eigenpairs(L0, 1.0, 5.0)
    assert np.allclose(energies, exact[(exact > 1.0) & (exact <= 5.0)])
    assert np.allclose(vectors.conj().T @ vectors, np.eye(energies.size), atol=1e-10)


def test_free_operator_has_no_localized_states():
    """Test the free box spectrum is all discretized continuum."""
    grid = Grid1D.half_line(100.0, 1001)
    scan = embedded_eigen_scan(assemble_L0(grid, K, CrossSection(0)), SpectralWindow(0.3, 1.5))
    assert scan
    assert not any(entry.localized for entry in scan)


def test_trapped_state_is_localized():
    """Test the barrier-trapped level is flagged and sits near (π/5)²."""
    grid = Grid1D.half_line(100.0, 1001)
    scan = embedded_eigen_scan(_trap(grid), SpectralWindow(0.3, 0.45))
    localized = [entry for entry in scan if entry.localized]
    assert len(localized) == 1
    assert localized[0].energy == pytest.approx((np.pi / 5.0) ** 2, rel=0.05)
    assert localized[0].radius < 5.0


def test_mourre_free_operator():
    """Test the compressed commutator is bounded below by (λ₀ − ε)."""
    grid = Grid1D.half_line(300.0, 2001)
    L0 = assemble_L0(grid, K, CrossSection(0))
    A = assemble_A(grid, CutoffSpec(4.0))
    report = mourre_form_check(L0, A, SpectralWindow(0.9, 1.1), 0.1, 2, c0=1.0)
    assert report.n_filtered > 3
    assert report.expected == pytest.approx(0.9)
    assert report.alpha_hat >= 0.85
    assert report.violated_dim <= 2
    assert report.status == PASS


def test_mourre_without_c0():
    """Test no expected bound means nothing is counted as violated."""
    grid = Grid1D.half_line(300.0, 2001)
    L0 = assemble_L0(grid, K, CrossSection(0))
    report = mourre_form_check(L0, assemble_A(grid, CutoffSpec(4.0)), SpectralWindow(0.9, 1.1), 0.1, 2)
    assert report.expected is None
    assert report.violated_dim == 0
    assert len(report.spectrum) == report.n_filtered


def test_mourre_preconditions():
    """Test the threshold and dense-size checks."""
    grid = Grid1D.half_line(30.0, 201)
    L0 = assemble_L0(grid, K, CrossSection(0))
    A = assemble_A(grid, CutoffSpec(4.0))
    with pytest.raises(WindowTouchesThreshold):
        mourre_form_check(L0, A, SpectralWindow(-1.0, 0.0), 0.1, 10)
    with pytest.raises(DenseLimitExceeded):
        mourre_form_check(L0, A, SpectralWindow(0.9, 1.1), 0.1, 10, max_dim=100)


def test_lap_below_spectrum():
    """Test the weighted resolvent at λ = −1 is bounded by 1/dist(λ, σ(L))."""
    grid = Grid1D.half_line(100.0, 501)
    L0 = assemble_L0(grid, K, CrossSection(0))
    report = lap_resolvent_sup(L0, -1.0, 1.0, [0.2, 0.1], 2, np.random.default_rng(0))
    assert report.bound_hat <= 1.0 + 1e-6
    assert [eta for eta, _ in report.curve] == [0.2, 0.1]
    assert report.status == PASS


def test_lap_resolution_floor():
    """Test η below the level spacing is rejected."""
    grid = Grid1D.half_line(100.0, 501)
    L0 = assemble_L0(grid, K, CrossSection(0))
    with pytest.raises(ResolutionFloor):
        lap_resolvent_sup(L0, 1.0, 1.0, [0.1, 1e-4], 2, np.random.default_rng(0))


def test_kato_outgoing_packet():
    """Test ∫‖⟨r⟩^{−3}e^{−itL}u‖²dt plateaus for an outgoing packet."""
    grid = Grid1D.half_line(200.0, 1001)
    cs = CrossSection(0)
    L0 = assemble_L0(grid, K, cs)
    G0 = assemble_weight(grid, cs, CutoffSpec(4.0), K, "G0", 3.0)
    report = kato_smoothness_integral(L0, G0, make_packet(20.0, 1.0, 3.0, grid), 40.0)
    assert report.status == PASS
    assert report.plateau_ratio < 0.01
    assert report.integral_curve[-1][0] == pytest.approx(40.0)
    assert 0.0 < report.bound_hat < 20.0**-5


def test_kato_fails_on_bound_state():
    """Test a stationary state accumulates linearly."""
    grid = Grid1D.half_line(100.0, 1001)
    trap = _trap(grid)
    energies, vectors = window_eigenpairs(trap, 0.3, 0.45)
    radii = [np.dot(grid.r_active, np.abs(vectors[:, i]) ** 2) for i in range(energies.size)]
    u = WaveField.from_vector(grid, 1, vectors[:, int(np.argmin(radii))]).normalized()
    G0 = assemble_weight(grid, CrossSection(0), CutoffSpec(4.0), K, "G0")
    report = kato_smoothness_integral(trap, G0, u, 10.0, samples=64)
    assert report.plateau_ratio == pytest.approx(0.5, abs=1e-3)
    assert report.status == FAIL


def test_kato_G2_on_zero_mode():
    """Test G2 annihilates the m = 0 channel."""
    grid = Grid1D.half_line(60.0, 401)
    cs = CrossSection(1)
    L0 = assemble_L0(grid, K, cs)
    G2 = assemble_weight(grid, cs, CutoffSpec(4.0), K, "G2")
    u = make_packet(30.0, 1.0, 3.0, grid, cs.modes)
    report = kato_smoothness_integral(L0, G2, u, 5.0, samples=16)
    assert report.bound_hat == 0.0
    assert report.status == PASS


def test_kato_weights_share_one_evolution():
    """Test the multi-weight integrals match separate single-weight runs."""
    grid = Grid1D.half_line(100.0, 501)
    cs = CrossSection(1)
    L0 = assemble_L0(grid, K, cs)
    weights = [assemble_weight(grid, cs, CutoffSpec(4.0), K, kind) for kind in ("G0", "G1", "G2")]
    u = make_packet(20.0, 1.0, 3.0, grid, cs.modes, cs.mode_index(1))
    shared = kato_smoothness_integrals(L0, weights, u, 10.0, samples=32)
    assert [r.G_kind for r in shared] == [G.name for G in weights]
    for G, report in zip(weights, shared):
        single = kato_smoothness_integral(L0, G, u, 10.0, samples=32)
        assert np.allclose(report.integral_curve, single.integral_curve, rtol=1e-12, atol=0.0)
        assert report.plateau_ratio == pytest.approx(single.plateau_ratio, rel=1e-12)


def _weights(grid: Grid1D, cs: CrossSection, cut: CutoffSpec):
    return [assemble_weight(grid, cs, cut, K, kind) for kind in ("G0", "G1", "G2")]


def test_radiation_finite_constant():
    """Test a finite C is found and the worst sample vector respects the form inequality."""
    grid = Grid1D.half_line(30.0, 201)
    cs, cut = CrossSection(0), CutoffSpec(4.0)
    L0 = assemble_L0(grid, K, cs)
    G0, G1, G2 = _weights(grid, cs, cut)
    report = radiation_inequality_check(
        L0, assemble_M(grid, cut), G0, G1, G2, 1.0, 0.5, 4, np.random.default_rng(0)
    )
    assert 0.0 <= report.C < 1e3
    assert report.worst_margin <= 1e-8
    assert report.status == PASS


def test_radiation_without_control():
    """Test an overweighted G2 term with no G0/G1 control has no finite C."""
    grid = Grid1D.half_line(30.0, 201)
    cs, cut = CrossSection(1), CutoffSpec(4.0)
    L0 = assemble_L0(grid, K, cs)
    G0, G1, G2 = _weights(grid, cs, cut)
    M = assemble_M(grid, cut, cs.modes)
    rng = np.random.default_rng(0)
    with pytest.raises(NoFiniteC):
        radiation_inequality_check(L0, M, G0.scaled(0.0), G1.scaled(0.0), G2, 1.0, -1.0, 2, rng)
