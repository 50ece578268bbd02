"""Wave operators by Cook's method and the scattering diagnostics built on them.

Provides:
- Identifier (J: full line → half line), IdentityIdentifier, ModifiedIdentifier (J·J±)
- cook_wave_operator(), cook_adjoint(), modified_wave_operator()
- isometry_defect(), chain_rule_check(), intertwining_defect(), adjointness_defect()
- completeness_probe(), member_ratio(), filtered_ensemble()

W±u = lim_{t→±∞} e^{itH}J e^{−itH₀}u is evaluated at the first sampled time T
where the remaining Cook integral ∫_T^∞ ‖(HJ − JH₀)e^{−itH₀}u‖dt falls below
tol·‖u‖. The integral beyond the sampled range is extrapolated from a
power-law fit of the last decade of samples; a fitted exponent ≥ −1 leaves
the limit unresolved and the result is reported as not converged.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .assemble import DiscreteOperator
from .diagnostics import embedded_eigen_scan, window_eigenpairs
from .errors import GridMismatch, WindowContainsEigenvalue, WindowTouchesThreshold
from .grid import FULL_LINE, Grid1D, WaveField
from .model import SpectralWindow, chi
from .pdo import IdentifierFamily
from .propagate import evolve, iter_evolution, taper

logger = logging.getLogger(__name__)

COOK_SAMPLES = 200
DEFAULT_TOL = 1e-3
ZERO_TOL = 1e-13
CONVERGED = "converged"
NOT_CONVERGED = "not_converged"


# === Identifiers ===


@dataclass(frozen=True)
class Identifier:
    """(Ju)(r) = χ(r/radius)u(r) for r > 0, transplanted onto the half-line grid.

    Wave operators do not depend on the radius; a large radius cuts off
    states localized near the origin.
    """

    half: Grid1D
    full: Grid1D
    radius: float = 1.0

    def __post_init__(self):
        if not self.half.is_half_line or self.full.kind != FULL_LINE:
            raise GridMismatch("identifier maps a full-line grid onto a half-line grid")
        if abs(self.half.h - self.full.h) > 1e-12 * self.half.h:
            raise GridMismatch(f"grid spacings differ: {self.half.h} vs {self.full.h}")
        if self.full.origin_index + self.half.n - 1 > self.full.n:
            raise GridMismatch("full-line grid does not cover the half-line grid")
        if not 0.0 < self.radius < self.half.r_max:
            raise ValueError(f"identifier radius must lie in (0, {self.half.r_max}), got {self.radius}")

    @classmethod
    def for_grid(cls, half: Grid1D, radius: float = 1.0) -> "Identifier":
        return cls(half, Grid1D.reference_for(half), radius)

    @property
    def _rows(self) -> tuple[slice, np.ndarray]:
        count = self.half.n - 1
        start = self.full.origin_index
        return slice(start, start + count), chi(self.half.r[:count] / self.radius)

    def apply(self, u: WaveField) -> WaveField:
        if u.grid != self.full:
            raise GridMismatch("field does not live on the identifier's full-line grid")
        rows, weight = self._rows
        values = np.zeros((self.half.n, u.modes), dtype=np.complex128)
        values[: self.half.n - 1] = weight[:, None] * u.values[rows]
        return WaveField(self.half, values)

    def adjoint(self, w: WaveField) -> WaveField:
        if w.grid != self.half:
            raise GridMismatch("field does not live on the identifier's half-line grid")
        rows, weight = self._rows
        values = np.zeros((self.full.n, w.modes), dtype=np.complex128)
        values[rows] = weight[:, None] * w.values[: self.half.n - 1]
        return WaveField(self.full, values)


def apply_identifier(u: WaveField, half: Grid1D) -> WaveField:
    """Ju on the given half-line grid.

    Raises:
        GridMismatch: spacings or extents do not match
    """
    return Identifier(half, u.grid).apply(u)


@dataclass(frozen=True)
class _AdjointMap:
    identifier: object

    def apply(self, w: WaveField) -> WaveField:
        return self.identifier.adjoint(w)


class IdentityIdentifier:
    """Identity map, for one-space wave operators."""

    def apply(self, u: WaveField) -> WaveField:
        return u

    def adjoint(self, w: WaveField) -> WaveField:
        return w


@dataclass(frozen=True, eq=False)
class ModifiedIdentifier:
    """J·J± with the per-mode oscillating identifiers applied first."""

    embedding: Identifier
    family: IdentifierFamily

    def apply(self, u: WaveField) -> WaveField:
        return self.embedding.apply(self.family.apply(u))

    def adjoint(self, w: WaveField) -> WaveField:
        return self.family.adjoint(self.embedding.adjoint(w))


# === Cook's method ===


@dataclass(frozen=True)
class CookResult:
    """Finite-T evaluation of a wave operator with its convergence record.

    Attributes:
        w: Candidate value of the wave operator at T_used
        T_used: Stopping time (T_max when not converged)
        integrand_samples: (t, ‖(HJ − JH₀)e^{−itH₀}u‖) pairs
        tail_estimate: Bound on the Cook integral beyond T_used
        exponent: Power-law exponent of the last decade of samples
        converged: Tail below tolerance with a decaying fit
        status: "converged" or "not_converged"
    """

    w: WaveField
    T_used: float
    integrand_samples: list[tuple[float, float]]
    tail_estimate: float
    exponent: float
    converged: bool
    status: str
    direction: int = 1
    channels: list["CookResult"] = field(default_factory=list, repr=False)


def _fit_tail(times: np.ndarray, values: np.ndarray, scale: float) -> tuple[float, float]:
    """(exponent, ∫_{t_end}^∞ extrapolation) from the last decade of samples."""
    t_end = times[-1]
    decade = (times >= t_end / 10.0) & (times > 0)
    t, f = times[decade], values[decade]
    positive = f > ZERO_TOL * scale
    if not positive.any():
        return -math.inf, 0.0
    if positive.sum() < 3:
        return math.inf, math.inf
    fit = linregress(np.log(t[positive]), np.log(f[positive]))
    p = float(fit.slope)
    if p >= -1.0:
        return p, math.inf
    c = math.exp(fit.intercept)
    return p, c * t_end ** (p + 1.0) / (-p - 1.0)


def _cook(
    H_final: DiscreteOperator,
    H_start: DiscreteOperator,
    identifier,
    u: WaveField,
    direction: int,
    T_max: float,
    dt: float | None,
    tol: float,
    samples: int = COOK_SAMPLES,
) -> CookResult:
    sign = 1 if direction > 0 else -1
    taus = np.linspace(0.0, T_max, samples + 1)
    states = [(0.0, u)] + list(iter_evolution(H_start, u, sign * taus[1:], dt))

    integrand = np.empty(taus.size)
    for i, (_, v) in enumerate(states):
        defect = H_final.apply(identifier.apply(v)) - identifier.apply(H_start.apply(v))
        integrand[i] = defect.norm()

    scale = max(u.norm(), 1e-300)
    exponent, extrapolated = _fit_tail(taus, integrand, scale)
    pieces = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(taus)
    remaining = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + extrapolated

    hits = np.flatnonzero(remaining < tol * scale)
    converged = bool(hits.size) and math.isfinite(extrapolated)
    index = int(hits[0]) if converged else taus.size - 1
    T_used = float(taus[index])

    mapped = identifier.apply(states[index][1])
    w = evolve(H_final, mapped, -sign * T_used, dt)
    logger.debug(
        "cook %s/%s: T=%.4g tail=%.3g exponent=%.3g converged=%s",
        H_final.name,
        H_start.name,
        T_used,
        remaining[index],
        exponent,
        converged,
    )
    return CookResult(
        w=w,
        T_used=T_used,
        integrand_samples=[(float(sign * t), float(f)) for t, f in zip(taus, integrand)],
        tail_estimate=float(remaining[index]),
        exponent=exponent,
        converged=converged,
        status=CONVERGED if converged else NOT_CONVERGED,
        direction=sign,
    )


def cook_wave_operator(
    H: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    u: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> CookResult:
    """W±(H, H₀; J)u = lim e^{±itH}J e^{∓itH₀}u by Cook's method.

    Args:
        H: Final operator (half-line L or L0)
        H0: Initial operator (full-line H₀ or half-line L0)
        identifier: Object with apply()/adjoint(), mapping H0's space into H's
        u: Initial state, filtered into a window away from thresholds
        direction: +1 for t → +∞, −1 for t → −∞
        T_max: Largest time sampled
        dt: Crank–Nicolson step
        tol: Tail tolerance relative to ‖u‖

    Returns:
        CookResult; converged=False signals an unresolved limit

    Raises:
        BoundaryLeak: either evolution reaches the artificial boundary
    """
    return _cook(H, H0, identifier, u, direction, T_max, dt, tol)


def cook_adjoint(
    H: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    v: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> CookResult:
    """W±(H, H₀; J)*v = lim e^{±itH₀}J* e^{∓itH}v."""
    return _cook(H0, H, _AdjointMap(identifier), v, direction, T_max, dt, tol)


def _merge_channels(results: list[CookResult]) -> CookResult:
    w = sum((r.w for r in results[1:]), results[0].w)
    times = [t for t, _ in results[0].integrand_samples]
    totals = np.sum([[f for _, f in r.integrand_samples] for r in results], axis=0)
    converged = all(r.converged for r in results)
    return CookResult(
        w=w,
        T_used=max(r.T_used for r in results),
        integrand_samples=list(zip(times, totals.tolist())),
        tail_estimate=float(sum(r.tail_estimate for r in results)),
        exponent=max(r.exponent for r in results),
        converged=converged,
        status=CONVERGED if converged else NOT_CONVERGED,
        direction=results[0].direction,
        channels=results,
    )


def modified_wave_operator(
    L: DiscreteOperator,
    H0: DiscreteOperator,
    J: Identifier,
    family: IdentifierFamily,
    u: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> CookResult:
    """W±(L, H₀; J·J±)u, one Cook run per occupied channel, summed.

    The channel results are kept in CookResult.channels.
    """
    identifier = ModifiedIdentifier(J, family)
    occupied = [j for j, norm in enumerate(u.mode_norms()) if norm > 0]
    if not occupied:
        occupied = [u.modes // 2]

    def run(j: int) -> CookResult:
        return _cook(L, H0, identifier, u.mode(j), direction, T_max, dt, tol)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, occupied))
    logger.info("modified wave operator: %d channels, converged=%s", len(results), all(r.converged for r in results))
    return _merge_channels(results)


# === Invariants ===


def isometry_defect(result: CookResult, u: WaveField) -> float:
    return abs(result.w.norm() - u.norm())


def chain_rule_check(
    L: DiscreteOperator,
    L0: DiscreteOperator,
    H0: DiscreteOperator,
    J: Identifier,
    u: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """‖W(L, H₀; J)u − W(L, L₀)W(L₀, H₀; J)u‖."""
    direct = cook_wave_operator(L, H0, J, u, direction, T_max, dt, tol)
    inner = cook_wave_operator(L0, H0, J, u, direction, T_max, dt, tol)
    outer = cook_wave_operator(L, L0, IdentityIdentifier(), inner.w, direction, T_max, dt, tol)
    defect = (direct.w - outer.w).norm()
    logger.debug("chain rule defect %.3g", defect)
    return defect


def intertwining_defect(
    H: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    u: WaveField,
    s: float,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """‖e^{−isH}Wu − W e^{−isH₀}u‖."""
    left = evolve(H, cook_wave_operator(H, H0, identifier, u, direction, T_max, dt, tol).w, s, dt)
    right = cook_wave_operator(H, H0, identifier, evolve(H0, u, s, dt), direction, T_max, dt, tol).w
    return (left - right).norm()


def adjointness_defect(
    H: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    u: WaveField,
    v: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """|⟨Wu, v⟩ − ⟨u, W*v⟩|."""
    wu = cook_wave_operator(H, H0, identifier, u, direction, T_max, dt, tol).w
    wv = cook_adjoint(H, H0, identifier, v, direction, T_max, dt, tol).w
    return abs(wu.inner(v) - u.inner(wv))


# === Completeness ===


@dataclass(frozen=True)
class CompletenessReport:
    """Adjoint wave-operator ratios ‖W*v‖²/‖v‖² over an orthonormal ensemble.

    Attributes:
        ratios: Per-member ratio
        statuses: Per-member "converged" or "not_converged"
        T_used: Per-member stopping time
        mean: Mean ratio
    """

    ratios: list[float]
    statuses: list[str]
    T_used: list[float]
    mean: float

    @property
    def converged(self) -> bool:
        return all(status == CONVERGED for status in self.statuses)


def member_ratio(
    L: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    v: WaveField,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[float, CookResult]:
    """(‖W±*v‖²/‖v‖², the adjoint Cook run) for one state v of L's space."""
    result = cook_adjoint(L, H0, identifier, v, direction, T_max, dt, tol)
    return result.w.norm() ** 2 / v.norm() ** 2, result


def filtered_ensemble(
    L: DiscreteOperator, window: SpectralWindow, size: int, r_seed: float, rng: np.random.Generator
) -> list[WaveField]:
    """Orthonormal f(L)v for random v supported in r ≤ r_seed, f a smooth bump on the window.

    The filtered states are cut off smoothly beyond 2·r_seed before
    orthonormalization.
    """
    energies, vectors = window_eigenpairs(L, window.lo, window.hi)
    weights = window.bump(energies)
    seeds = (L.grid.r_active <= r_seed).astype(float)[:, None] * np.ones((1, L.modes))
    columns = []
    for _ in range(size):
        v = (rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim)) * seeds.reshape(-1)
        filtered = WaveField.from_vector(L.grid, L.modes, vectors @ (weights * (vectors.conj().T @ v)))
        columns.append(taper(filtered, 0.0, 2.0 * r_seed, r_seed).vector())
    q, _ = np.linalg.qr(np.stack(columns, axis=1))
    return [WaveField.from_vector(L.grid, L.modes, q[:, i]).normalized() for i in range(size)]


def completeness_probe(
    L: DiscreteOperator,
    H0: DiscreteOperator,
    identifier,
    window: SpectralWindow,
    ensemble_size: int,
    rng: np.random.Generator,
    direction: int = 1,
    T_max: float = 50.0,
    dt: float | None = None,
    tol: float = DEFAULT_TOL,
    r_seed: float = 10.0,
    threads: int = 1,
) -> CompletenessReport:
    """Mean of ‖W±(L, H₀; J)*v‖²/‖v‖² over an orthonormal ensemble in E_Λ(L)H.

    Each member's adjoint limit lim e^{±itH₀}J*e^{∓itL}v comes from
    cook_adjoint(); members whose tail stays unresolved are marked
    not_converged. The mean is near 1 when the window carries no point
    spectrum. With a cutoff radius beyond the support of the bound states,
    bound states give ratios near 0.

    Args:
        L: Half-line operator
        H0: Reference operator on the identifier's domain
        identifier: Identifier or ModifiedIdentifier
        window: Energy window, inside (0, ∞)
        ensemble_size: Number of members
        rng: Random stream for the seeds
        direction: +1 for t → +∞, −1 for t → −∞
        T_max: Largest time sampled per member
        dt: Crank–Nicolson step
        tol: Tail tolerance relative to ‖v‖
        r_seed: Seeds are supported in r ≤ r_seed
        threads: Members evaluated in parallel

    Raises:
        WindowTouchesThreshold: the window reaches 0
        WindowContainsEigenvalue: a localized eigenvalue lies in the window
    """
    if window.lo <= 0:
        raise WindowTouchesThreshold(f"window [{window.lo}, {window.hi}] reaches the threshold 0")
    scan = embedded_eigen_scan(L, window)
    localized = [e.energy for e in scan if e.localized]
    if localized:
        raise WindowContainsEigenvalue(f"localized eigenvalues {localized} inside [{window.lo}, {window.hi}]")

    members = filtered_ensemble(L, window, ensemble_size, r_seed, rng)

    def run(v: WaveField) -> tuple[float, CookResult]:
        return member_ratio(L, H0, identifier, v, direction, T_max, dt, tol)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        runs = list(pool.map(run, members))
    ratios = [ratio for ratio, _ in runs]
    statuses = [result.status for _, result in runs]
    unresolved = statuses.count(NOT_CONVERGED)
    if unresolved:
        logger.warning("completeness: %d of %d members not converged", unresolved, len(runs))
    logger.info("completeness: mean ratio %.4f over %d members", np.mean(ratios), len(ratios))
    return CompletenessReport(
        ratios=ratios,
        statuses=statuses,
        T_used=[result.T_used for _, result in runs],
        mean=float(np.mean(ratios)),
    )
