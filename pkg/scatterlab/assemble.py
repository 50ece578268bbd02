"""Sparse operator assembly over (radial grid) ⊗ (angular modes).

Provides:
- DiscreteOperator: sparse matrix with grid/mode metadata and an optional exact momentum symbol
- assemble_L0(), assemble_E(), assemble_L(): the operator L = L0 + E on the half-line
- assemble_A(), assemble_M(): conjugate operator and radiation multiplier
- commutator_iLA(), double_commutator_norm()
- assemble_reference(): H0, Hk, HL on the periodic full line
- assemble_weight(): smoothness weights G0(s), G1(s), G2

Unknowns are flattened as index = i_r·modes + j with modes ordered m = −M..M.
D_r = −i∂_r is the centered difference and D_r² the 3-point stencil; every
first-order term is symmetrized at assembly so Hermiticity is exact.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, GridTooCoarse, GridTooSmall, NonHermitianCoeffs
from .grid import Grid1D, WaveField, momentum_filter
from .model import CrossSection, CutoffSpec, ModelSpec, PerturbationCoeffs, RadialProfile, ScalingFunction, bracket

logger = logging.getLogger(__name__)

COARSE_LIMIT = 0.1


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Sparse operator on grid ⊗ modes.

    Attributes:
        matrix: CSR matrix of size (n_active·modes)²
        grid: Grid the operator acts on
        modes: Number of angular modes
        hermitian: Hermitian flag (checked by hermiticity_defect)
        name: Label used in logs and reports
        momentum_symbol: Exact multiplier ω(ρ) for momentum-diagonal operators
    """

    matrix: sp.csr_matrix
    grid: Grid1D
    modes: int
    hermitian: bool = True
    name: str = ""
    momentum_symbol: np.ndarray | None = None

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=np.complex128)
        if matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"{self.name or 'operator'}: matrix {matrix.shape} does not match dim {self.dim}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.grid.n_active * self.modes

    @property
    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        return int(np.abs(coo.row - coo.col).max()) if coo.nnz else 0

    def hermiticity_defect(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def same_space(self, other: "DiscreteOperator") -> bool:
        return self.grid == other.grid and self.modes == other.modes

    def _check(self, other: "DiscreteOperator"):
        if not self.same_space(other):
            raise DimensionMismatch(f"{self.name} and {other.name} act on different spaces")

    def apply(self, u: WaveField) -> WaveField:
        if u.grid != self.grid or u.modes != self.modes:
            raise DimensionMismatch(f"{self.name}: field does not live on the operator's space")
        if self.momentum_symbol is not None:
            return momentum_filter(u, self.momentum_symbol)
        return WaveField.from_vector(self.grid, self.modes, self.matrix @ u.vector())

    def quadratic_form(self, u: WaveField) -> float:
        return float(np.real(u.inner(self.apply(u))))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "DiscreteOperator":
        return DiscreteOperator(self.matrix.conj().T, self.grid, self.modes, self.hermitian, f"{self.name}*")

    def scaled(self, c: float) -> "DiscreteOperator":
        symbol = None if self.momentum_symbol is None else c * self.momentum_symbol
        return DiscreteOperator(c * self.matrix, self.grid, self.modes, self.hermitian, self.name, symbol)

    def __add__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        self._check(other)
        symbol = None
        if self.momentum_symbol is not None and other.momentum_symbol is not None:
            symbol = self.momentum_symbol + other.momentum_symbol
        return DiscreteOperator(
            self.matrix + other.matrix,
            self.grid,
            self.modes,
            self.hermitian and other.hermitian,
            f"{self.name}+{other.name}",
            symbol,
        )

    def __sub__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        return self + other.scaled(-1.0)


# === Radial building blocks ===


def _shift(n: int, periodic: bool) -> sp.csr_matrix:
    """S with S[i, i+1] = 1 (wrapping when periodic)."""
    s = sp.diags([np.ones(n - 1)], [1], shape=(n, n), format="lil")
    if periodic:
        s[n - 1, 0] = 1.0
    return s.tocsr()


def radial_stencil(grid: Grid1D) -> sp.csr_matrix:
    """3-point stencil for D_r² = −∂_r² on the active points."""
    n = grid.n_active
    s = _shift(n, not grid.is_half_line)
    return ((2.0 * sp.identity(n) - s - s.T) / grid.h**2).tocsr()


def radial_derivative(grid: Grid1D) -> sp.csr_matrix:
    """Centered difference for D_r = −i∂_r on the active points."""
    n = grid.n_active
    s = _shift(n, not grid.is_half_line)
    return ((-0.5j / grid.h) * (s - s.T)).tocsr()


def _lift(radial, modes: int) -> sp.csr_matrix:
    return sp.kron(radial, sp.identity(modes), format="csr")


def _diag(values) -> sp.csr_matrix:
    return sp.diags(np.asarray(values), 0, format="csr")


def _angular(grid: Grid1D, per_mode) -> sp.csr_matrix:
    return sp.kron(sp.identity(grid.n_active), _diag(per_mode), format="csr")


def _coarse_guard(grid: Grid1D, k: ScalingFunction, cs: CrossSection):
    r = grid.r_active
    end = r >= 0.5
    if not end.any() or cs.mode_cutoff == 0:
        return
    scale = grid.h**2 * float(k.k(r[end]).max()) * cs.mode_cutoff**2
    if scale > COARSE_LIMIT:
        raise GridTooCoarse(f"h²·max k·M² = {scale:.3g} exceeds {COARSE_LIMIT}; refine the grid")


# === One-space operators ===


def assemble_L0(grid: Grid1D, k: ScalingFunction, cs: CrossSection) -> DiscreteOperator:
    """L0 = D_r² + k(r)P on the half-line with Dirichlet ends.

    Args:
        grid: Half-line grid
        k: Scaling function
        cs: Cross section (mode cutoff)

    Returns:
        Hermitian DiscreteOperator

    Raises:
        GridTooCoarse: h² · max k · M² > 0.1 on the end
    """
    if not grid.is_half_line:
        raise DimensionMismatch("L0 lives on the half-line grid")
    _coarse_guard(grid, k, cs)
    kinetic = _lift(radial_stencil(grid), cs.modes)
    angular = sp.kron(_diag(k.k(grid.r_active)), _diag(cs.eigenvalues), format="csr")
    logger.debug("assemble_L0: n=%d h=%.4g modes=%d", grid.n, grid.h, cs.modes)
    return DiscreteOperator(kinetic + angular, grid, cs.modes, True, "L0")


def assemble_E(
    grid: Grid1D, coeffs: PerturbationCoeffs, cs: CrossSection, k: ScalingFunction
) -> DiscreteOperator:
    """Perturbation E with θ-dependent coefficients as mode-coupling matrices.

    E = V + (b1 D_r + D_r b1) + (b2 S + S b2) + D_r a1 D_r + (D_r a2 S + S a2 D_r) + S a3 S
    with S = √k D̃_θ acting as √k(r)·m on mode m.

    Raises:
        NonHermitianCoeffs: Fourier data of a term is not Hermitian-symmetric
    """
    modes = cs.modes
    r = grid.r_active
    d = _lift(radial_derivative(grid), modes)
    s = sp.kron(_diag(np.sqrt(k.k(r))), _diag(cs.mode_numbers.astype(float)), format="csr")
    total = sp.csr_matrix((grid.n_active * modes, grid.n_active * modes), dtype=np.complex128)

    for term in coeffs.terms:
        if not term.is_hermitian():
            raise NonHermitianCoeffs(f"coefficient {term.name}: f̂(−j) ≠ conj f̂(j)")
        c = sp.kron(_diag(term.profile(r)), sp.csr_matrix(term.coupling(cs.mode_cutoff)), format="csr")
        match term.name:
            case "V":
                part = c
            case "b1":
                part = c @ d + d @ c
            case "b2":
                part = c @ s + s @ c
            case "a1L" | "a1S":
                part = d @ c @ d
            case "a2":
                part = d @ c @ s + s @ c @ d
            case "a3":
                part = s @ c @ s
        total = total + part

    return DiscreteOperator(total, grid, modes, True, "E")


def assemble_L(grid: Grid1D, model: ModelSpec) -> DiscreteOperator:
    """L = L0 + E for a model."""
    op = assemble_L0(grid, model.k, model.cross_section) + assemble_E(
        grid, model.coeffs, model.cross_section, model.k
    )
    return DiscreteOperator(op.matrix, grid, op.modes, True, "L")


def _symmetrized_first_order(grid: Grid1D, modes: int, x: np.ndarray, name: str) -> DiscreteOperator:
    xm = _diag(x)
    d = radial_derivative(grid)
    return DiscreteOperator(_lift(0.5 * (xm @ d + d @ xm), modes), grid, modes, True, name)


def assemble_A(grid: Grid1D, cutoff: CutoffSpec, modes: int = 1) -> DiscreteOperator:
    """Conjugate operator A = ½(χ_R² r D_r + D_r r χ_R²)."""
    if cutoff.R < 2.0 * grid.h:
        raise ValueError(f"cutoff radius {cutoff.R} below two grid cells")
    r = grid.r_active
    return _symmetrized_first_order(grid, modes, cutoff.chi_R(r) ** 2 * r, "A")


def assemble_M(grid: Grid1D, cutoff: CutoffSpec, modes: int = 1) -> DiscreteOperator:
    """Radiation multiplier M = ½(χ_R D_r + D_r χ_R)."""
    return _symmetrized_first_order(grid, modes, cutoff.chi_R(grid.r_active), "M")


def commutator_iLA(L: DiscreteOperator, A: DiscreteOperator) -> DiscreteOperator:
    """i[L, A] = i(LA − AL) as an exact sparse product difference.

    Raises:
        DimensionMismatch: L and A act on different spaces
    """
    L._check(A)
    matrix = 1j * (L.matrix @ A.matrix - A.matrix @ L.matrix)
    return DiscreteOperator(matrix, L.grid, L.modes, L.hermitian and A.hermitian, f"i[{L.name},{A.name}]")


def double_commutator_norm(L: DiscreteOperator, A: DiscreteOperator) -> float:
    """Max column sum of i[i[L, A], A]; finite on every grid."""
    inner = commutator_iLA(L, A)
    outer = commutator_iLA(inner, A)
    return float(spla.norm(outer.matrix, 1))


# === Reference operators on the full line ===


def assemble_reference(
    grid: Grid1D,
    k: ScalingFunction,
    cs: CrossSection,
    which: str = "H0",
    a1L: RadialProfile | None = None,
    min_half_width: float = 20.0,
) -> DiscreteOperator:
    """Reference operators on ℝ × S¹: H0 = D_r², Hk = D_r² + k(|r|)P, HL = Hk + D_r a1L D_r.

    H0 carries its exact momentum multiplier (4/h²)sin²(ρh/2), the symbol of
    the periodic stencil, and is applied spectrally.

    Raises:
        GridTooSmall: fewer than 16 points or half width below min_half_width
    """
    if grid.is_half_line:
        raise DimensionMismatch("reference operators live on the full-line grid")
    if grid.n < 16 or grid.r_max < min_half_width:
        raise GridTooSmall(f"reference grid of {grid.n} points over half width {grid.r_max} is too small")
    if which not in ("H0", "Hk", "HL"):
        raise ValueError(f"unknown reference operator {which!r}")

    modes = cs.modes
    matrix = _lift(radial_stencil(grid), modes)
    if which == "H0":
        symbol = (4.0 / grid.h**2) * np.sin(0.5 * grid.rho * grid.h) ** 2
        return DiscreteOperator(matrix, grid, modes, True, "H0", symbol)

    r = np.abs(grid.r)
    matrix = matrix + sp.kron(_diag(k.k(r)), _diag(cs.eigenvalues), format="csr")
    if which == "HL" and a1L is not None:
        d = radial_derivative(grid)
        matrix = matrix + _lift(d @ _diag(a1L(r)) @ d, modes)
    return DiscreteOperator(matrix, grid, modes, True, which)


# === Smoothness weights ===


def assemble_weight(
    grid: Grid1D,
    cs: CrossSection,
    cutoff: CutoffSpec,
    k: ScalingFunction,
    kind: str,
    s: float = 1.0,
) -> DiscreteOperator:
    """G0 = ⟨r⟩^{−s}, G1 = χ_R⟨r⟩^{−s}D_r, G2 = χ_R⟨r⟩^{−1/2}(kP)^{1/2}."""
    r = grid.r_active
    modes = cs.modes
    match kind:
        case "G0":
            return DiscreteOperator(_lift(_diag(bracket(r) ** (-s)), modes), grid, modes, True, "G0")
        case "G1":
            radial = _diag(cutoff.chi_R(r) * bracket(r) ** (-s)) @ radial_derivative(grid)
            return DiscreteOperator(_lift(radial, modes), grid, modes, False, "G1")
        case "G2":
            radial = cutoff.chi_R(r) * bracket(r) ** -0.5 * np.sqrt(k.k(r))
            matrix = sp.kron(_diag(radial), _diag(np.abs(cs.mode_numbers).astype(float)), format="csr")
            return DiscreteOperator(matrix, grid, modes, True, "G2")
    raise ValueError(f"unknown weight kind {kind!r}")
