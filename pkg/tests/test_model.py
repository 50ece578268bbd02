"""Tests for the model layer: cutoffs, scaling functions, coefficients."""

import numpy as np
import pytest

from scatterlab.errors import IncompleteSpec, NonPositiveK, UnsupportedCoefficient, ViolatedBound
from scatterlab.model import (
    LONG_RANGE_A1,
    LONG_RANGE_K,
    SHORT_RANGE,
    CoefficientTerm,
    CrossSection,
    CutoffSpec,
    ModelSpec,
    PerturbationCoeffs,
    ScalingFunction,
    SpectralWindow,
    channel_eigenvalues,
    chi,
    classify_perturbation,
    smooth_step,
    validate_scaling,
)


def test_smooth_step_limits():
    """Test the step is 0 below 0, 1 above 1 and symmetric about 1/2."""
    t = np.array([-1.0, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0])
    s = smooth_step(t)
    assert s[0] == 0.0 and s[1] == 0.0
    assert s[-1] == 1.0 and s[-2] == 1.0
    assert s[3] == pytest.approx(0.5)
    assert s[2] + s[4] == pytest.approx(1.0)
    assert np.all(np.diff(s) >= 0)


def test_chi_support():
    """Test χ vanishes below 1/2 and equals 1 above 1."""
    assert chi(0.4) == 0.0
    assert chi(1.0) == 1.0
    assert 0.0 < chi(0.75) < 1.0


def test_cutoff_eta_and_chi_R():
    """Test η switches on between R and 2R, χ_R between R/2 and R."""
    cut = CutoffSpec(4.0)
    assert cut.eta(4.0) == 0.0
    assert cut.eta(-8.0) == 1.0
    assert cut.chi_R(2.0) == 0.0
    assert cut.chi_R(4.0) == 1.0


def test_cutoff_psi_is_one_on_window():
    """Test ψ equals 1 on the window and vanishes beyond its support."""
    cut = CutoffSpec(4.0)
    window = SpectralWindow(0.9, 1.1)
    assert np.all(cut.psi(np.linspace(0.9, 1.1, 11), window) == 1.0)
    lo, hi = cut.psi_support(window)
    assert cut.psi(lo - 1e-9, window) == 0.0
    assert cut.psi(hi + 1e-9, window) == 0.0


def test_cutoff_rejects_nonpositive_radius():
    """Test R must be positive."""
    with pytest.raises(ValueError):
        CutoffSpec(0.0)


def test_power_scaling_bounds():
    """Test k = r^(−1) has c0 = C = 1 and c2 = 2."""
    bounds = validate_scaling(ScalingFunction.power(1.0), 1.0, 100.0, 1000)
    assert bounds.c0_hat == pytest.approx(1.0, abs=1e-9)
    assert bounds.C_hat == pytest.approx(1.0, abs=1e-9)
    assert bounds.c2_hat == pytest.approx(2.0, abs=1e-9)


def test_power_scaling_declared_constants():
    """Test the declared constants of a power law."""
    k = ScalingFunction.power(0.6, 2.0)
    assert k.nu_k == 0.6
    assert k.c0_bound == 0.6
    assert k.k(10.0) == pytest.approx(2.0 * 10.0**-0.6)
    assert k.dk(10.0) == pytest.approx(-0.6 * 2.0 * 10.0**-1.6)


def test_scaling_is_even_and_clipped():
    """Test k is evaluated at |r| and its derivatives vanish near the origin."""
    k = ScalingFunction.power(1.0)
    assert k.k(-3.0) == pytest.approx(k.k(3.0))
    assert k.dk(0.1) == 0.0
    assert np.isfinite(k.k(0.0))


def test_tabulated_scaling_matches_power():
    """Test a tabulated power law reproduces its derivative constant."""
    r = np.geomspace(0.5, 500.0, 60)
    k = ScalingFunction.tabulated(r, r**-1.5, nu=1.5)
    bounds = validate_scaling(k, 1.0, 100.0, 500)
    assert bounds.c0_hat == pytest.approx(1.5, rel=1e-6)
    assert k.nu_k == 1.5


def test_tabulated_scaling_rejects_nonpositive():
    """Test tabulated k must be positive."""
    with pytest.raises(NonPositiveK):
        ScalingFunction.tabulated([1.0, 2.0, 3.0, 4.0], [1.0, 0.5, 0.0, 0.1], nu=1.0)


def test_increasing_scaling_violates_bound():
    """Test an increasing k is rejected."""
    r = np.geomspace(0.5, 500.0, 40)
    k = ScalingFunction.tabulated(r, r**0.5, nu=0.5)
    with pytest.raises(ViolatedBound):
        validate_scaling(k)


def test_validate_scaling_argument_checks():
    """Test sampling ranges are checked."""
    with pytest.raises(ValueError):
        validate_scaling(ScalingFunction.power(1.0), 0.5, 10.0)
    with pytest.raises(ValueError):
        validate_scaling(ScalingFunction.power(1.0), 1.0, 10.0, 10)


def test_unknown_scaling_kind():
    """Test unknown kinds are unsupported."""
    with pytest.raises(UnsupportedCoefficient):
        ScalingFunction(kind="exponential")


def test_cross_section_modes():
    """Test mode ordering m = −M..M and the eigenvalues m²."""
    cs = CrossSection(2)
    assert cs.modes == 5
    assert list(cs.mode_numbers) == [-2, -1, 0, 1, 2]
    assert list(cs.eigenvalues) == [4.0, 1.0, 0.0, 1.0, 4.0]
    assert cs.mode_index(0) == 2
    with pytest.raises(ValueError):
        cs.mode_index(3)


def test_channel_eigenvalues():
    """Test distinct eigenvalues carry multiplicity 2 except m = 0."""
    assert channel_eigenvalues(CrossSection(2)) == [(0, 1), (1, 2), (4, 2)]
    assert channel_eigenvalues(CrossSection(0)) == [(0, 1)]


def test_cosine_coefficient():
    """Test cosine modes split into conjugate Fourier pairs."""
    term = CoefficientTerm.from_cosine("V", 1.0, 2.0, [(0, 1.0), (2, 0.5)])
    assert dict(term.fourier) == {-2: 0.25, 0: 1.0, 2: 0.25}
    assert term.is_hermitian()
    assert not term.theta_independent
    assert term.angular(0.0) == pytest.approx(1.5)


def test_coefficient_coupling_matrix():
    """Test F[n, n′] = f̂_{n−n′} and the cutoff check."""
    term = CoefficientTerm.from_cosine("V", 1.0, 2.0, [(1, 2.0)])
    F = term.coupling(1)
    assert F.shape == (3, 3)
    assert F[1, 0] == pytest.approx(1.0)
    assert F[0, 0] == 0.0
    with pytest.raises(UnsupportedCoefficient):
        CoefficientTerm.from_cosine("V", 1.0, 2.0, [(3, 1.0)]).coupling(1)


def test_coefficient_profile_decay():
    """Test the profile decays like ⟨r⟩^(−ν) beyond r = 1."""
    term = CoefficientTerm("V", 2.0, 1.5)
    assert term.profile(0.2) == 0.0
    assert term.profile(100.0) == pytest.approx(2.0 * (1.0 + 1e4) ** -0.75)


def test_unknown_coefficient_name():
    """Test coefficient names are checked."""
    with pytest.raises(UnsupportedCoefficient):
        CoefficientTerm("W", 1.0, 1.0)


def test_a1L_must_be_radial():
    """Test a θ-dependent a1L is rejected."""
    term = CoefficientTerm.from_cosine("a1L", 0.1, 0.5, [(1, 1.0)])
    with pytest.raises(UnsupportedCoefficient):
        PerturbationCoeffs((term,))


def test_classification():
    """Test the three model classes."""
    k_short, k_long = ScalingFunction.power(1.2), ScalingFunction.power(0.6)
    v_short = PerturbationCoeffs((CoefficientTerm("V", 0.3, 1.5),))
    assert classify_perturbation(v_short, k_short) == SHORT_RANGE
    assert classify_perturbation(v_short, k_long) == LONG_RANGE_K
    a1 = PerturbationCoeffs((CoefficientTerm("a1L", 0.1, 0.5),))
    assert classify_perturbation(a1, k_short) == LONG_RANGE_A1


def test_long_range_e_without_a1L_is_rejected():
    """Test a slowly decaying V with a1L = 0 has no class and is rejected."""
    slow_v = PerturbationCoeffs((CoefficientTerm("V", 0.3, 0.5),))
    with pytest.raises(UnsupportedCoefficient, match="a1L"):
        classify_perturbation(slow_v, ScalingFunction.power(1.2))
    slow_v_with_a1 = PerturbationCoeffs((CoefficientTerm("V", 0.3, 0.5), CoefficientTerm("a1L", 0.1, 0.5)))
    assert classify_perturbation(slow_v_with_a1, ScalingFunction.power(1.2)) == LONG_RANGE_A1


def test_classification_needs_decay_indices():
    """Test a missing ν on an active coefficient is incomplete."""
    coeffs = PerturbationCoeffs((CoefficientTerm("V", 0.3, None),))
    with pytest.raises(IncompleteSpec):
        classify_perturbation(coeffs, ScalingFunction.power(1.0))


def test_decay_constants():
    """Test the sampled constant of c·χ⟨r⟩^(−ν) tends to |c|."""
    coeffs = PerturbationCoeffs((CoefficientTerm("V", -0.5, 2.0),))
    constants = coeffs.decay_constants(100.0)
    assert constants["V[0]"] == pytest.approx(0.5, rel=1e-3)


def test_spectral_window():
    """Test window geometry and the smooth bump."""
    window = SpectralWindow(0.9, 1.1)
    assert window.center == pytest.approx(1.0)
    assert window.width == pytest.approx(0.2)
    assert window.contains(1.0) and not window.contains(1.2)
    assert window.bump(1.0) == 1.0
    assert window.bump(0.9) == 0.0
    with pytest.raises(ValueError):
        SpectralWindow(1.0, 1.0)


def test_model_spec_decay():
    """Test the model reports its decay class with a classification."""
    model = ModelSpec(
        k=ScalingFunction.power(1.0),
        cross_section=CrossSection(1),
        coeffs=PerturbationCoeffs((CoefficientTerm("V", -0.5, 2.0),)),
        cutoff=CutoffSpec(4.0),
        window=SpectralWindow(0.9, 1.1),
    )
    decay = model.decay
    assert decay.nu_V == 2.0
    assert decay.nu_k == 1.0
    assert decay.nu_a1L == np.inf
    assert decay.classification == LONG_RANGE_K
