"""Long-range phase modifiers.

Builds Φ(r, ρ) by successive approximation so that the remainder
R[Φ] = (1 + a1L)(∂_rΦ + ρ)² + λk − ρ² decays faster than r^{-1}:

    ∂_rΦ^(1)   = −(λk + a1L ρ²) / (2(1 + a1L) ρ)
    ∂_rΦ^(N+1) = ∂_rΦ^(N) − ((∂_rΦ^(N))² − (∂_rΦ^(N−1))²) / (2ρ)

with Φ^(N)(r, ρ) = ∫_R^r ∂_sΦ^(N)(s, ρ) ds, iterated N = [1/ν] times. Radial
and momentum derivatives come from the differentiated recursion; only Φ and
∂_ρΦ need quadrature, which is tabulated once and interpolated.

Provides:
- PhaseFunction, build_phase(), modifier_decay()
- remainder(), estimate_decay(), remainder_report(), phase_table()
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.interpolate import RectBivariateSpline
from scipy.stats import linregress

from .errors import IntegerNuInverse, NonAdmissible, NonPositiveSample, OutOfDomain
from .model import ModelSpec, RadialProfile, ScalingFunction

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Ladder:
    """Top two rungs of the recursion and derivatives of the top rung."""

    g: np.ndarray
    g_prev: np.ndarray
    g_r: np.ndarray
    g_rho: np.ndarray
    increments: tuple[np.ndarray, ...]


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    """Modifier phase on {R ≤ |r| ≤ r_max, rho_lo ≤ |ρ| ≤ rho_hi}.

    Φ(−r, −ρ) = Φ(r, ρ); ∂_rΦ is odd in ρ and even in r.

    Attributes:
        k: Scaling function (None for k ≡ 0)
        a1L: Long-range radial coefficient
        lam: Channel eigenvalue λ multiplying k
        R: Onset radius
        nu: Decay index fixing the iteration depth
        n_iters: Iteration depth [1/ν]
        rho_lo: Lower edge of the momentum window (|ρ|)
        rho_hi: Upper edge of the momentum window
        r_max: Outer radius of the table
    """

    k: ScalingFunction | None
    a1L: RadialProfile
    lam: float
    R: float
    nu: float
    n_iters: int
    rho_lo: float
    rho_hi: float
    r_max: float
    _phi: RectBivariateSpline | None = field(default=None, repr=False)
    _phi_rho: RectBivariateSpline | None = field(default=None, repr=False)

    @property
    def is_zero(self) -> bool:
        return (self.k is None or self.lam == 0.0) and not self.a1L.active

    # --- pointwise ladder on r ≥ R, ρ > 0 ---

    def _radial(self, r):
        if self.k is None or self.lam == 0.0:
            kv = np.zeros_like(r)
            dk = np.zeros_like(r)
        else:
            kv = self.lam * self.k.k(r)
            dk = self.lam * self.k.dk(r)
        return kv, dk, self.a1L(r), self.a1L.deriv(r)

    def ladder(self, r, rho) -> Ladder:
        """Recursion rungs at radius r > 0 and momentum ρ > 0 (broadcast)."""
        r, rho = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rho, dtype=float))
        kv, dk, a, da = self._radial(r)
        one = 1.0 + a
        rho2 = rho * rho

        g_prev = np.zeros_like(r)
        g = -(kv + a * rho2) / (2.0 * one * rho)
        gr_prev = np.zeros_like(r)
        gr = -((dk + da * rho2) * one - (kv + a * rho2) * da) / (2.0 * one**2 * rho)
        gp_prev = np.zeros_like(r)
        gp = (kv - a * rho2) / (2.0 * one * rho2)
        increments = [g]

        for _ in range(self.n_iters - 1):
            sq = g * g - g_prev * g_prev
            step = -sq / (2.0 * rho)
            g_next = g + step
            gr_next = gr - (g * gr - g_prev * gr_prev) / rho
            gp_next = gp - (g * gp - g_prev * gp_prev) / rho + sq / (2.0 * rho2)
            g_prev, g = g, g_next
            gr_prev, gr = gr, gr_next
            gp_prev, gp = gp, gp_next
            increments.append(step)

        return Ladder(g, g_prev, gr, gp, tuple(increments))

    # --- domain handling ---

    def _check_domain(self, r, rho):
        ar = np.abs(r)
        arho = np.abs(rho)
        tol = 1e-9
        if np.any(ar < self.R * (1 - tol)) or np.any(ar > self.r_max * (1 + tol)):
            raise OutOfDomain(f"|r| outside [{self.R}, {self.r_max}]")
        if np.any(arho < self.rho_lo * (1 - tol)) or np.any(arho > self.rho_hi * (1 + tol)):
            raise OutOfDomain(f"|ρ| outside [{self.rho_lo}, {self.rho_hi}]")

    def _prepare(self, r, rho, check: bool):
        r, rho = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rho, dtype=float))
        if check:
            self._check_domain(r, rho)
        ar = np.clip(np.abs(r), self.R, self.r_max)
        arho = np.clip(np.abs(rho), self.rho_lo, self.rho_hi)
        inside = np.abs(r) >= self.R
        return r, rho, ar, arho, inside

    # --- public evaluation ---

    def dr(self, r, rho, check: bool = True):
        """∂_rΦ (closed form)."""
        r, rho, ar, arho, inside = self._prepare(r, rho, check)
        return np.where(inside, np.sign(rho) * self.ladder(ar, arho).g, 0.0)

    def drr(self, r, rho, check: bool = True):
        """∂_r²Φ (closed form)."""
        r, rho, ar, arho, inside = self._prepare(r, rho, check)
        return np.where(inside, np.sign(r) * np.sign(rho) * self.ladder(ar, arho).g_r, 0.0)

    def value(self, r, rho, check: bool = True):
        """Φ from the interpolated quadrature table."""
        r, rho, ar, arho, inside = self._prepare(r, rho, check)
        if self._phi is None:
            return np.zeros(r.shape)
        return np.where(inside, np.sign(r) * np.sign(rho) * self._phi.ev(ar, arho), 0.0)

    def drho(self, r, rho, check: bool = True):
        """∂_ρΦ from the interpolated quadrature table."""
        r, rho, ar, arho, inside = self._prepare(r, rho, check)
        if self._phi_rho is None:
            return np.zeros(r.shape)
        return np.where(inside, np.sign(r) * self._phi_rho.ev(ar, arho), 0.0)

    def value_exact(self, r: float, rho: float) -> float:
        """Φ(r, ρ) by direct adaptive quadrature."""
        self._check_domain(np.asarray(r), np.asarray(rho))
        if self.is_zero:
            return 0.0
        result, _ = quad(
            lambda s: float(self.ladder(s, abs(rho)).g), self.R, abs(r), epsabs=QUAD_TOL, epsrel=1e-12, limit=200
        )
        return math.copysign(1.0, r) * math.copysign(1.0, rho) * result


def modifier_decay(model: ModelSpec) -> float:
    """Decay index driving the iteration: min(ν_k, ν_a1L) when a1L is active."""
    nu = model.k.nu_k
    if model.coeffs.a1L.active:
        nu = min(nu, model.coeffs.a1L.nu)
    return nu


def build_phase(
    k: ScalingFunction | None,
    a1L: RadialProfile | None,
    momentum_window: tuple[float, float],
    R: float,
    nu: float,
    lam: float = 1.0,
    r_max: float = 2000.0,
    n_r: int = 400,
    n_rho: int = 48,
) -> PhaseFunction:
    """Construct the modifier phase Φ = Φ^([1/ν]).

    Args:
        k: Scaling function (None for k ≡ 0)
        a1L: Long-range part of a1 (None for zero)
        momentum_window: (ρ_lo, ρ_hi), bounded away from 0
        R: Onset radius of the phase
        nu: Decay index in (0, 1) with 1/ν not an integer
        lam: Channel eigenvalue multiplying k
        r_max: Outer radius of the quadrature table
        n_r: Geometric radial table nodes
        n_rho: Momentum table nodes

    Returns:
        PhaseFunction with tabulated Φ and ∂_ρΦ

    Raises:
        NonAdmissible: |a1L| ≥ 1/2 beyond R, ν ∉ (0, 1), or window touching 0
        IntegerNuInverse: 1/ν is an integer

    Examples:
        >>> phase = build_phase(ScalingFunction.power(0.6), None, (0.5, 1.5), R=2.0, nu=0.6)
        >>> phase.n_iters
        1
    """
    if not 0.0 < nu < 1.0:
        raise NonAdmissible(f"decay index must lie in (0, 1), got {nu}")
    inverse = 1.0 / nu
    if abs(inverse - round(inverse)) < 1e-12:
        raise IntegerNuInverse(f"1/ν = {inverse:.12g} is an integer")
    rho_lo, rho_hi = momentum_window
    if not 0.0 < rho_lo < rho_hi:
        raise NonAdmissible(f"momentum window ({rho_lo}, {rho_hi}) must be bounded away from 0")
    if r_max <= R:
        raise NonAdmissible(f"table radius {r_max} must exceed R = {R}")

    a1L = a1L if a1L is not None else RadialProfile()
    r_nodes = np.geomspace(R, r_max, n_r)
    if np.any(np.abs(a1L(r_nodes)) >= 0.5):
        raise NonAdmissible("|a1L| ≥ 1/2 inside the phase domain")

    n_iters = math.floor(inverse)
    phase = PhaseFunction(k, a1L, lam, R, nu, n_iters, rho_lo, rho_hi, r_max)
    if phase.is_zero:
        logger.debug("build_phase: zero phase (λ=%g)", lam)
        return phase

    rho_nodes = np.linspace(rho_lo, rho_hi, n_rho)

    def integrand(s):
        lad = phase.ladder(s, rho_nodes)
        return np.concatenate([lad.g, lad.g_rho])

    table = np.zeros((n_r, 2 * n_rho))
    for i in range(1, n_r):
        piece, _ = quad_vec(integrand, r_nodes[i - 1], r_nodes[i], epsabs=QUAD_TOL, epsrel=1e-12)
        table[i] = table[i - 1] + piece

    phi = RectBivariateSpline(r_nodes, rho_nodes, table[:, :n_rho], kx=3, ky=3, s=0)
    phi_rho = RectBivariateSpline(r_nodes, rho_nodes, table[:, n_rho:], kx=3, ky=3, s=0)
    logger.debug("build_phase: λ=%g ν=%g N=%d R=%g r_max=%g", lam, nu, n_iters, R, r_max)
    return PhaseFunction(k, a1L, lam, R, nu, n_iters, rho_lo, rho_hi, r_max, phi, phi_rho)


def remainder(phase: PhaseFunction) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """R[Φ](r, ρ) = (1 + a1L)(∂_rΦ + ρ)² + λk − ρ².

    Evaluated in the telescoped form (1 + a1L)((∂_rΦ^(N))² − (∂_rΦ^(N−1))²),
    which is algebraically identical and free of cancellation.
    """

    def evaluate(r, rho):
        r, rho, ar, arho, _ = phase._prepare(r, rho, check=True)
        lad = phase.ladder(ar, arho)
        return (1.0 + phase.a1L(ar)) * (lad.g - lad.g_prev) * (lad.g + lad.g_prev)

    return evaluate


@dataclass(frozen=True)
class DecayFit:
    """Log-log least-squares fit f ≈ C·r^slope."""

    slope: float
    intercept: float
    residual: float


def estimate_decay(f: Callable[[np.ndarray], np.ndarray], r_lo: float, r_hi: float, n: int = 200) -> DecayFit:
    """Fit the power-law decay of a positive function on [r_lo, r_hi].

    Raises:
        NonPositiveSample: f ≤ 0 at a sample
    """
    r = np.geomspace(r_lo, r_hi, n)
    values = np.asarray(f(r), dtype=float)
    if np.any(~(values > 0)):
        raise NonPositiveSample(f"f ≤ 0 at r = {r[np.argmin(values)]:.6g}")
    fit = linregress(np.log(r), np.log(values))
    residual = float(np.sqrt(np.mean((np.log(values) - fit.intercept - fit.slope * np.log(r)) ** 2)))
    return DecayFit(float(fit.slope), float(fit.intercept), residual)


@dataclass(frozen=True)
class RemainderReport:
    slope_hat: float
    epsilon_expected: float
    fit_residual: float
    r_lo: float
    r_hi: float

    @property
    def expected_slope(self) -> float:
        return -(1.0 + self.epsilon_expected)


def remainder_report(
    phase: PhaseFunction, rho: float, r_lo: float | None = None, r_hi: float | None = None, n: int = 200
) -> RemainderReport:
    """Fit the decay of |R[Φ]| at fixed ρ; defaults to r ∈ [10R, r_max]."""
    if n < 50:
        raise ValueError(f"remainder fit needs at least 50 samples, got {n}")
    r_lo = 10.0 * phase.R if r_lo is None else r_lo
    r_hi = phase.r_max if r_hi is None else r_hi
    rem = remainder(phase)
    fit = estimate_decay(lambda r: np.abs(rem(r, rho)), r_lo, r_hi, n)
    epsilon = phase.nu * (phase.n_iters + 1) - 1.0
    return RemainderReport(fit.slope, epsilon, fit.residual, r_lo, r_hi)


def phase_table(phase: PhaseFunction, r, rho) -> list[tuple[float, float, float, float, float]]:
    """Rows (r, ρ, Φ, ∂_rΦ, R[Φ]) over the tensor grid r × ρ."""
    rr, pp = np.meshgrid(np.asarray(r, dtype=float), np.asarray(rho, dtype=float), indexing="ij")
    rr, pp = rr.ravel(), pp.ravel()
    values = phase.value(rr, pp)
    slopes = phase.dr(rr, pp)
    rems = remainder(phase)(rr, pp)
    return list(zip(rr.tolist(), pp.tolist(), values.tolist(), slopes.tolist(), rems.tolist()))
