"""Oscillating-symbol pseudodifferential operators on the full line.

J(Φ, a)u(r) = (2π)^{-1/2} ∫ e^{irρ + iΦ(r,ρ)} a(r, ρ) û(ρ) dρ, evaluated by direct
quadrature over the momentum grid of a periodic full-line grid.

Provides:
- Symbol, PolynomialSymbol
- OscillatingOp, lattice_momentum(), apply_osc(), apply_osc_adjoint(), apply_pdo()
- compose_left(), compose_right(), product_defect()
- build_channel_identifier(), build_identifier_family(), IdentifierFamily
"""

import logging
import math
import threading
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, SupportMismatch, UnsupportedSymbolDegree, WindowTouchesZero
from .grid import FULL_LINE, Grid1D, MomentumField, WaveField, fourier, inverse_fourier, momentum_filter
from .model import CutoffSpec, ModelSpec, SpectralWindow, smooth_step
from .phase import PhaseFunction, build_phase, modifier_decay

logger = logging.getLogger(__name__)

ROW_CHUNK = 256
FD_STEP = 1e-4
OUTER_MARGIN = 0.1


# === Symbols ===


@dataclass(frozen=True)
class Symbol:
    """Symbol a(r, ρ) of order m, supported in |ρ| ∈ support.

    Attributes:
        fn: Vectorized a(r, ρ)
        order: Order m in |∂_r^l a| ≤ C(1+|r|)^(m−l)
        support: Closed interval of |ρ| outside which a vanishes (None: unrestricted)
        dr_fn: Optional closed form of ∂_r a
        name: Label for logs and exports
    """

    fn: Callable
    order: float = 0.0
    support: tuple[float, float] | None = None
    dr_fn: Callable | None = None
    name: str = "a"

    def columns(self, rho: np.ndarray) -> np.ndarray:
        if self.support is None:
            return np.ones(rho.shape, dtype=bool)
        lo, hi = self.support
        return (np.abs(rho) >= lo) & (np.abs(rho) <= hi)

    def __call__(self, r, rho):
        r, rho = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rho, dtype=float))
        values = np.asarray(self.fn(r, rho), dtype=np.complex128) * np.ones(r.shape)
        return np.where(self.columns(rho), values, 0.0)

    def dr(self, r, rho):
        if self.dr_fn is not None:
            r, rho = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rho, dtype=float))
            return np.where(self.columns(rho), self.dr_fn(r, rho), 0.0)
        return (self(np.asarray(r) + FD_STEP, rho) - self(np.asarray(r) - FD_STEP, rho)) / (2.0 * FD_STEP)

    def drr(self, r, rho):
        r = np.asarray(r, dtype=float)
        return (self(r + FD_STEP, rho) - 2.0 * self(r, rho) + self(r - FD_STEP, rho)) / FD_STEP**2

    def __add__(self, other: "Symbol") -> "Symbol":
        support = None
        if self.support is not None and other.support is not None:
            support = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        return Symbol(
            lambda r, rho: self(r, rho) + other(r, rho),
            max(self.order, other.order),
            support,
            name=f"{self.name}+{other.name}",
        )

    def seminorms(self, r, rho) -> tuple[float, float]:
        """Sampled C_l = max |∂_r^l a|·(1+|r|)^(l−m) for l = 0, 1."""
        rr, pp = np.meshgrid(np.asarray(r, dtype=float), np.asarray(rho, dtype=float), indexing="ij")
        weight = (1.0 + np.abs(rr)) ** (-self.order)
        c0 = float(np.max(np.abs(self(rr, pp)) * weight))
        c1 = float(np.max(np.abs(self.dr(rr, pp)) * weight * (1.0 + np.abs(rr))))
        return c0, c1


def _as_callable(c):
    if callable(c):
        return c
    return lambda r: np.full(np.shape(r), c, dtype=np.complex128)


@dataclass(frozen=True)
class PolynomialSymbol:
    """b(r, ρ) = Σ_j c_j(r) ρ^j; coefficients are numbers or callables of r."""

    coefficients: tuple
    name: str = "b"

    @classmethod
    def momentum_square(cls) -> "PolynomialSymbol":
        return cls((0.0, 0.0, 1.0), "rho^2")

    @classmethod
    def channel_hamiltonian(cls, k, a1L, lam: float) -> "PolynomialSymbol":
        """(1 + a1L)ρ² + λk + i⁻¹(∂_r a1L)ρ, the symbol of D_r(1 + a1L)D_r + λk."""

        def c0(r):
            return lam * k.k(r) if k is not None else np.zeros(np.shape(r))

        def c1(r):
            return -1j * np.sign(r) * a1L.deriv(r)

        def c2(r):
            return 1.0 + a1L(r)

        return cls((c0, c1, c2), f"h[{lam:g}]")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def r_independent(self) -> bool:
        return not any(callable(c) for c in self.coefficients)

    def coefficient(self, j: int, r):
        if j >= len(self.coefficients):
            return np.zeros(np.shape(r), dtype=np.complex128)
        return np.asarray(_as_callable(self.coefficients[j])(np.asarray(r, dtype=float)), dtype=np.complex128)

    def __call__(self, r, rho):
        return sum(self.coefficient(j, r) * np.asarray(rho) ** j for j in range(self.degree + 1))

    def d_rho(self, r, eta):
        return sum(j * self.coefficient(j, r) * np.asarray(eta) ** (j - 1) for j in range(1, self.degree + 1))

    def d_rho2(self, r, eta):
        return sum(
            j * (j - 1) * self.coefficient(j, r) * np.asarray(eta) ** (j - 2) for j in range(2, self.degree + 1)
        )


def apply_pdo(b: PolynomialSymbol, u: WaveField) -> WaveField:
    """b(x, D)u = Σ_j c_j(r)·D^j u with D = −i∂_r applied spectrally."""
    _require_full_line(u.grid)
    r = u.grid.r
    out = np.zeros_like(u.values)
    for j in range(b.degree + 1):
        term = u.values if j == 0 else momentum_filter(u, u.grid.rho**j).values
        out += b.coefficient(j, r)[:, None] * term
    return WaveField(u.grid, out)


# === Oscillating operators ===


def lattice_momentum(rho, h: float):
    """sin(ρh)/h: the momentum at which ρ² has the stencil's group velocity.

    Examples:
        >>> round(float(lattice_momentum(1.0, 1e-6)), 12)
        1.0
    """
    return np.sin(np.asarray(rho, dtype=float) * h) / h


@dataclass(frozen=True, eq=False)
class OscillatingOp:
    """χ(D)·J(Φ, a) with optional phase Φ and outer momentum filter χ.

    With lattice=True the phase is evaluated at the lattice momentum
    sin(ρh)/h, whose group velocity 2·sin(ρh)/h is that of the three-point
    stencil.
    """

    phase: PhaseFunction | None
    symbol: Symbol
    outer_filter: Callable | None = None
    name: str = "J"
    lattice: bool = False
    _kernels: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def kernel(self, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
        """(columns, K) with K[i, j] = Δρ(2π)^{-1/2}e^{ir_iρ_j + iΦ}a over active columns.

        Built once per grid; concurrent callers share one build.
        """
        with self._lock:
            cached = self._kernels.get(grid)
            if cached is None:
                cached = self._build_kernel(grid)
                self._kernels[grid] = cached
        return cached

    def _build_kernel(self, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
        self._check_support(grid)
        rho = grid.rho
        cols = np.flatnonzero(self.symbol.columns(rho))
        rho_c = rho[cols][None, :]
        rho_phase = lattice_momentum(rho_c, grid.h) if self.lattice else rho_c
        r = grid.r
        kernel = np.empty((grid.n, cols.size), dtype=np.complex128)
        for start in range(0, grid.n, ROW_CHUNK):
            rr = r[start : start + ROW_CHUNK, None]
            exponent = rr * rho_c
            if self.phase is not None and not self.phase.is_zero:
                exponent = exponent + self.phase.value(rr, rho_phase, check=False)
            kernel[start : start + ROW_CHUNK] = np.exp(1j * exponent) * self.symbol(rr, rho_c)
        kernel *= grid.drho / math.sqrt(2.0 * math.pi)
        logger.debug("%s: kernel %d×%d on n=%d", self.name, grid.n, cols.size, grid.n)
        return cols, kernel

    def _check_support(self, grid: Grid1D):
        if self.phase is None or self.phase.is_zero:
            return
        if self.symbol.support is None:
            raise SupportMismatch(f"{self.name}: phased operators need a compactly supported symbol")
        lo, hi = self.symbol.support
        if lo < self.phase.rho_lo * (1 - 1e-9) or hi > self.phase.rho_hi * (1 + 1e-9):
            raise SupportMismatch(
                f"{self.name}: symbol support [{lo:.4g}, {hi:.4g}] exceeds the phase window "
                f"[{self.phase.rho_lo:.4g}, {self.phase.rho_hi:.4g}]"
            )
        if max(abs(grid.r_min), abs(grid.r_max)) > self.phase.r_max * (1 + 1e-9):
            raise SupportMismatch(f"{self.name}: grid extends beyond the phase table radius {self.phase.r_max}")


def _require_full_line(grid: Grid1D):
    if grid.kind != FULL_LINE:
        raise GridMismatch("oscillating operators act on full-line fields")


def apply_osc(op: OscillatingOp, u: WaveField) -> WaveField:
    """Apply χ(D)J(Φ, a) to a full-line field, column by column.

    Raises:
        GridMismatch: u lives on a half-line grid
        SupportMismatch: the phase does not cover the symbol support

    Examples:
        >>> identity = OscillatingOp(None, Symbol(lambda r, rho: 1.0))
        >>> np.allclose(apply_osc(identity, u).values, u.values)
        True
    """
    grid = u.grid
    _require_full_line(grid)
    cols, kernel = op.kernel(grid)
    uh = fourier(u).values
    out = WaveField(grid, kernel @ uh[cols])
    if op.outer_filter is not None:
        out = momentum_filter(out, op.outer_filter(grid.rho))
    return out


def apply_osc_adjoint(op: OscillatingOp, w: WaveField) -> WaveField:
    """Apply (χ(D)J(Φ, a))* to a full-line field."""
    grid = w.grid
    _require_full_line(grid)
    if op.outer_filter is not None:
        w = momentum_filter(w, op.outer_filter(grid.rho))
    cols, kernel = op.kernel(grid)
    vh = np.zeros_like(w.values)
    vh[cols] = (grid.h / grid.drho) * (kernel.conj().T @ w.values)
    return inverse_fourier(MomentumField(grid, vh))


# === Composition ===


def _require_polynomial(b, max_degree: int = 2) -> PolynomialSymbol:
    if not isinstance(b, PolynomialSymbol) or b.degree > max_degree:
        raise UnsupportedSymbolDegree(f"symbol {getattr(b, 'name', b)!r} is not a polynomial of degree ≤ {max_degree}")
    return b


def _phase_derivatives(op: OscillatingOp, r, rho):
    if op.phase is None or op.phase.is_zero:
        zero = np.zeros(np.broadcast(np.asarray(r), np.asarray(rho)).shape)
        return zero, zero
    return op.phase.dr(r, rho, check=False), op.phase.drr(r, rho, check=False)


def composition_terms(b: PolynomialSymbol, op: OscillatingOp) -> tuple[Symbol, Symbol]:
    """Leading and first-order symbols of b(x, D)J(Φ, a) = J(Φ, d₀ + d₁ + c₂D_r²a).

    d₀ = b(r, ρ + ∂_rΦ)a,  d₁ = ∂_ρb(r, ρ + ∂_rΦ)·D_r a + ½∂_ρ²b(r, ρ + ∂_rΦ)·(D_r∂_rΦ)a.
    """
    b = _require_polynomial(b)
    a = op.symbol

    def leading(r, rho):
        phi_r, _ = _phase_derivatives(op, r, rho)
        return b(r, rho + phi_r) * a(r, rho)

    def correction(r, rho):
        phi_r, phi_rr = _phase_derivatives(op, r, rho)
        eta = rho + phi_r
        return b.d_rho(r, eta) * (-1j * a.dr(r, rho)) + 0.5 * b.d_rho2(r, eta) * (-1j * phi_rr) * a(r, rho)

    return (
        Symbol(leading, a.order, a.support, name=f"d0[{b.name}]"),
        Symbol(correction, a.order - 1.0, a.support, name=f"d1[{b.name}]"),
    )


def compose_left(b: PolynomialSymbol, op: OscillatingOp, n_terms: int = 2) -> Symbol:
    """Symbol d of b(x, D)J(Φ, a) truncated after one or two terms.

    Raises:
        UnsupportedSymbolDegree: b is not polynomial in ρ of degree ≤ 2
    """
    if n_terms not in (1, 2):
        raise ValueError(f"n_terms must be 1 or 2, got {n_terms}")
    d0, d1 = composition_terms(b, op)
    return d0 if n_terms == 1 else d0 + d1


def compose_right(op: OscillatingOp, c: PolynomialSymbol | None = None) -> Symbol:
    """Symbol e₀ = a·c̄(ρ) of J(Φ, a)c(x, D)*; e₁ vanishes for r-independent c.

    Raises:
        UnsupportedSymbolDegree: c depends on r or has degree above 2
    """
    c = PolynomialSymbol.momentum_square() if c is None else _require_polynomial(c)
    if not c.r_independent:
        raise UnsupportedSymbolDegree(f"right factor {c.name!r} depends on r")
    a = op.symbol
    return Symbol(
        lambda r, rho: a(r, rho) * np.conj(c(r, rho)), a.order + c.degree, a.support, name=f"e0[{c.name}]"
    )


def product_defect(op1: OscillatingOp, op2: OscillatingOp, u: WaveField) -> float:
    """‖J(Φ,a₁)J(Φ,a₂)*u − Op(a₁ā₂)u‖ for operators sharing one phase."""
    a1, a2 = op1.symbol, op2.symbol
    product = OscillatingOp(None, Symbol(lambda r, rho: a1(r, rho) * np.conj(a2(r, rho)), name="a1*conj(a2)"))
    bare1 = OscillatingOp(op1.phase, a1, name=op1.name)
    bare2 = OscillatingOp(op2.phase, a2, name=op2.name)
    return (apply_osc(bare1, apply_osc_adjoint(bare2, u)) - apply_osc(product, u)).norm()


# === Identifiers ===


def momentum_support(cutoffs: CutoffSpec, window: SpectralWindow) -> tuple[float, float]:
    """|ρ|-interval where ψ(ρ²) is nonzero."""
    lo, hi = cutoffs.psi_support(window)
    if window.lo <= 0 or lo <= 0:
        raise WindowTouchesZero(f"energy window [{window.lo}, {window.hi}] reaches the threshold 0")
    return math.sqrt(lo), math.sqrt(hi)


def channel_symbol(cutoffs: CutoffSpec, window: SpectralWindow, sign: int, drho: float) -> Symbol:
    """a^±(r, ρ) = η(r)ψ(ρ²)σ^±(r, ρ)."""
    support = momentum_support(cutoffs, window)

    def fn(r, rho):
        return cutoffs.eta(r) * cutoffs.psi(rho * rho, window) * cutoffs.sigma(r, rho, sign, drho)

    def dr(r, rho):
        return cutoffs.eta_deriv(r) * cutoffs.psi(rho * rho, window) * cutoffs.sigma(r, rho, sign, drho)

    return Symbol(fn, 0.0, support, dr, name=f"a{'+' if sign > 0 else '-'}")


def _outer_filter(phase: PhaseFunction | None, support, cutoffs: CutoffSpec, grid: Grid1D):
    rho_lo, rho_hi = support
    rho = np.linspace(rho_lo, rho_hi, 64)
    r = grid.r[grid.r > cutoffs.R]
    if phase is None or phase.is_zero or r.size == 0:
        v_lo, v_hi = rho_lo, rho_hi
    else:
        shifted = rho[None, :] + phase.dr(r[:, None], rho[None, :], check=False)
        v_lo, v_hi = float(shifted.min()), float(shifted.max())
    if v_lo <= 0:
        raise WindowTouchesZero(f"shifted momenta ρ + ∂_rΦ reach {v_lo:.4g} ≤ 0")
    margin = OUTER_MARGIN * v_lo

    def outer(p):
        p = np.abs(np.asarray(p, dtype=float))
        return smooth_step((p - (v_lo - margin)) / margin) * smooth_step(((v_hi + margin) - p) / margin)

    return outer


def build_channel_identifier(
    phase: PhaseFunction | None, cutoffs: CutoffSpec, window: SpectralWindow, sign: int, grid: Grid1D
) -> OscillatingOp:
    """J_λ^± = χ_λ^±(D_r)J(Φ_λ, a^±) on a full-line grid.

    The outer filter χ equals 1 on the shifted momenta {ρ + ∂_rΦ : ρ² ∈ supp ψ, |r| > R}.

    Raises:
        WindowTouchesZero: the window or the shifted momenta reach 0
    """
    _require_full_line(grid)
    symbol = channel_symbol(cutoffs, window, sign, grid.drho)
    outer = _outer_filter(phase, symbol.support, cutoffs, grid)
    return OscillatingOp(phase, symbol, outer, name=f"J{'+' if sign > 0 else '-'}", lattice=True)


@dataclass(frozen=True, eq=False)
class IdentifierFamily:
    """Per-mode identifiers; ops[j] acts on mode column j."""

    ops: tuple[OscillatingOp, ...]
    sign: int

    def apply(self, u: WaveField) -> WaveField:
        columns = [apply_osc(op, u.mode(j)).values[:, j] for j, op in enumerate(self.ops)]
        return WaveField(u.grid, np.stack(columns, axis=1))

    def adjoint(self, w: WaveField) -> WaveField:
        columns = [apply_osc_adjoint(op, w.mode(j)).values[:, j] for j, op in enumerate(self.ops)]
        return WaveField(w.grid, np.stack(columns, axis=1))


def build_identifier_family(model: ModelSpec, grid: Grid1D, sign: int) -> IdentifierFamily:
    """Identifiers J_λ^± for every mode, with phases built once per channel eigenvalue λ = m².

    Short-range models and the λ = 0 channel without a1L carry no phase.
    """
    _require_full_line(grid)
    support = momentum_support(model.cutoff, model.window)
    a1L = model.coeffs.a1L
    nu = modifier_decay(model)
    long_range = nu < 1.0

    phases: dict[float, PhaseFunction | None] = {}
    ops = []
    for lam in model.cross_section.eigenvalues:
        if lam not in phases:
            if not long_range or (lam == 0.0 and not a1L.active):
                phases[lam] = None
            else:
                phases[lam] = build_phase(model.k, a1L, support, model.cutoff.R, nu, lam=lam, r_max=grid.r_max)
        ops.append(build_channel_identifier(phases[lam], model.cutoff, model.window, sign, grid))
    logger.debug("identifier family: %d modes, %d phases", len(ops), sum(p is not None for p in phases.values()))
    return IdentifierFamily(tuple(ops), sign)
