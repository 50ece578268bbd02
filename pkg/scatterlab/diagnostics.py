"""Spectral diagnostics on assembled operators.

Provides:
- window_eigenpairs(), embedded_eigen_scan(): banded eigensolves in an energy window
- mourre_form_check(): positivity of the window-compressed commutator i[L, A]
- lap_resolvent_sup(): weighted resolvent norms as z approaches the real axis
- kato_smoothness_integral(), kato_smoothness_integrals(): time-integrated weighted norms along the evolution
- radiation_inequality_check(): the form inequality for the angular weight G2

Every check reduces to a statement about finite Hermitian matrices and
returns a report carrying its PASS/FAIL status.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, eig_banded, eigvalsh
from scipy.sparse.linalg import ArpackError, eigsh, splu
from scipy.sparse.linalg import norm as sparse_norm

from .assemble import DiscreteOperator, commutator_iLA
from .errors import (
    DenseLimitExceeded,
    NoFiniteC,
    ResolutionFloor,
    SolverFail,
    WindowTouchesThreshold,
)
from .grid import WaveField
from .model import SpectralWindow, bracket
from .propagate import iter_evolution

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"

LOCALIZED_FRACTION = 0.25
MAX_DENSE_DIM = 6000
PLATEAU_TOL = 0.01


# === Banded eigensolves ===


def to_banded(matrix) -> np.ndarray:
    """Lower banded storage ab[i − j, j] = a[i, j] of a Hermitian sparse matrix."""
    coo = sp.coo_matrix(matrix)
    lower = coo.row >= coo.col
    rows, cols, data = coo.row[lower], coo.col[lower], coo.data[lower]
    width = int((rows - cols).max()) if rows.size else 0
    ab = np.zeros((width + 1, matrix.shape[0]), dtype=np.complex128)
    ab[rows - cols, cols] = data
    return ab


def _banded_eigenpairs(matrix, lo: float, hi: float, name: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        return eig_banded(to_banded(matrix), lower=True, select="v", select_range=(lo, hi))
    except (LinAlgError, ValueError) as exc:
        raise SolverFail(f"eigensolve of {name} on ({lo}, {hi}] failed: {exc}") from exc


def window_eigenpairs(L: DiscreteOperator, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in (lo, hi] and orthonormal eigenvectors (columns).

    Raises:
        SolverFail: the banded eigensolver fails
    """
    return _banded_eigenpairs(L.matrix, lo, hi, L.name)


@dataclass(frozen=True)
class EigenEntry:
    energy: float
    radius: float
    localized: bool


def localization_radius(L: DiscreteOperator, vector: np.ndarray) -> float:
    """⟨r⟩ expectation of a Euclidean-normalized eigenvector."""
    weights = (np.abs(vector) ** 2).reshape(L.grid.n_active, L.modes).sum(axis=1)
    return float(np.dot(L.grid.r_active, weights) / weights.sum())


def embedded_eigen_scan(L: DiscreteOperator, window: SpectralWindow) -> list[EigenEntry]:
    """All matrix eigenvalues in the window, labeled by localization radius.

    Eigenvectors with ⟨r⟩ below a quarter of the box are bound-state
    candidates; the rest are discretized continuum.
    """
    energies, vectors = window_eigenpairs(L, window.lo, window.hi)
    cutoff = LOCALIZED_FRACTION * L.grid.r_max
    entries = []
    for i, energy in enumerate(energies):
        radius = localization_radius(L, vectors[:, i])
        entries.append(EigenEntry(float(energy), radius, radius < cutoff))
    logger.debug(
        "eigen scan [%g, %g]: %d eigenvalues, %d localized",
        window.lo,
        window.hi,
        len(entries),
        sum(e.localized for e in entries),
    )
    return entries


# === Mourre estimate ===


@dataclass(frozen=True)
class MourreReport:
    alpha_hat: float
    violated_dim: int
    expected: float | None
    n_filtered: int
    spectrum: list[float]
    status: str


def mourre_form_check(
    L: DiscreteOperator,
    A: DiscreteOperator,
    window: SpectralWindow,
    epsilon: float,
    compact_dim_budget: int,
    c0: float | None = None,
    tol: float = 0.05,
    max_dim: int = MAX_DENSE_DIM,
    guard_cells: int = 3,
) -> MourreReport:
    """Check f(L)i[L, A]f(L) ≥ α f(L)² + K with K of rank ≤ compact_dim_budget.

    The commutator is compressed onto the window eigenvectors of L on the box
    shortened by guard_cells radial points, where the full-grid product
    i(LA − AL) acts as the local commutator, and the pencil (fFf, f²) is solved.
    alpha_hat is its (budget + 1)-th smallest eigenvalue. With c0 given the
    expected bound is min(2, c0)(λ₀ − ε) at the window center λ₀, and
    violated_dim counts eigenvalues below it minus tol.

    Raises:
        WindowTouchesThreshold: window.lo ≤ 0
        DenseLimitExceeded: operator dimension above max_dim

    Examples:
        >>> report = mourre_form_check(L0, A, SpectralWindow(0.9, 1.1), 0.1, 10, c0=1.0)
        >>> report.alpha_hat >= 0.85
        True
    """
    if window.lo <= 0:
        raise WindowTouchesThreshold(f"window [{window.lo}, {window.hi}] reaches the threshold 0")
    if L.dim > max_dim:
        raise DenseLimitExceeded(f"dimension {L.dim} exceeds the dense limit {max_dim}")

    # Eigenvectors of the full box satisfy ⟨v, i[L, A]v⟩ = 0 exactly.
    keep = np.arange((L.grid.n_active - guard_cells) * L.modes)
    interior = L.matrix.tocsr()[keep][:, keep]
    energies, vectors = _banded_eigenpairs(interior, window.lo, window.hi, L.name)
    weights = window.bump(energies)
    live = weights > 1e-6
    vectors, weights = vectors[:, live], weights[live]

    commutator = commutator_iLA(L, A).matrix.tocsr()[keep][:, keep]
    compressed = vectors.conj().T @ (commutator @ vectors)
    compressed = 0.5 * (compressed + compressed.conj().T)
    # fFf − αf² and F − α share their inertia on ran f.
    mu = eigvalsh(compressed) if weights.size else np.array([])

    expected = None if c0 is None else min(2.0, c0) * (window.center - epsilon)
    violated = 0 if expected is None else int(np.sum(mu < expected - tol))
    alpha_hat = float(mu[compact_dim_budget]) if mu.size > compact_dim_budget else math.inf
    passed = violated <= compact_dim_budget and (expected is None or alpha_hat >= expected - tol)
    logger.info("mourre: %d directions, alpha_hat=%.4g violated=%d", mu.size, alpha_hat, violated)
    return MourreReport(alpha_hat, violated, expected, int(mu.size), mu.tolist(), PASS if passed else FAIL)


# === Limiting absorption ===


@dataclass(frozen=True)
class LapReport:
    bound_hat: float
    curve: list[tuple[float, float]]
    floor: float
    status: str


def level_spacing(L: DiscreteOperator, energy: float, count: int = 8) -> float:
    """Median spacing of the eigenvalues of L nearest to energy."""
    count = min(count, L.dim - 2)
    try:
        values = eigsh(L.matrix, k=count, sigma=energy, which="LM", return_eigenvectors=False)
    except (ArpackError, RuntimeError) as exc:
        raise SolverFail(f"shift-invert eigensolve at {energy} failed: {exc}") from exc
    return float(np.median(np.diff(np.sort(values.real))))


def _weighted_resolvent_norm(
    L: DiscreteOperator, z: complex, weight: np.ndarray, probes: int, rng: np.random.Generator, iters: int = 60
) -> float:
    eye = sp.identity(L.dim, format="csc", dtype=np.complex128)
    matrix = L.matrix.tocsc()
    try:
        forward = splu((matrix - z * eye).tocsc())
        backward = splu((matrix - np.conj(z) * eye).tocsc())
    except RuntimeError as exc:
        raise SolverFail(f"resolvent factorization at z={z} failed: {exc}") from exc

    best = 0.0
    for _ in range(probes):
        x = rng.standard_normal(L.dim) + 1j * rng.standard_normal(L.dim)
        x /= np.linalg.norm(x)
        estimate = 0.0
        for _ in range(iters):
            y = weight * forward.solve(weight * x)
            x = weight * backward.solve(weight * y)
            norm = np.linalg.norm(x)
            if not np.isfinite(norm) or norm == 0.0:
                break
            previous, estimate = estimate, math.sqrt(norm)
            x /= norm
            if abs(estimate - previous) <= 1e-10 * estimate:
                break
        best = max(best, estimate)
    return best


def lap_resolvent_sup(
    L: DiscreteOperator,
    energy: float,
    s: float,
    eta_list,
    probes: int,
    rng: np.random.Generator,
) -> LapReport:
    """Sup of ‖⟨r⟩^{−s}(L − λ − iη)^{−1}⟨r⟩^{−s}‖ over decreasing η.

    PASS when the last two η values agree within 10%.

    Raises:
        ResolutionFloor: an η below three level spacings at λ
        SolverFail: factorization failure
    """
    etas = sorted((float(e) for e in eta_list), reverse=True)
    floor = 3.0 * level_spacing(L, energy)
    if etas[-1] < floor:
        raise ResolutionFloor(f"η = {etas[-1]:.3g} below the resolution floor {floor:.3g}")

    weight = np.repeat(bracket(L.grid.r_active) ** (-s), L.modes)
    curve = [(eta, _weighted_resolvent_norm(L, energy + 1j * eta, weight, probes, rng)) for eta in etas]
    values = [v for _, v in curve]
    plateau = len(values) < 2 or abs(values[-1] - values[-2]) < 0.1 * values[-1]
    logger.info("lap at λ=%g s=%g: %s", energy, s, ", ".join(f"{e:.3g}:{v:.4g}" for e, v in curve))
    return LapReport(max(values), curve, floor, PASS if plateau else FAIL)


# === Kato smoothness ===


@dataclass(frozen=True)
class SmoothnessReport:
    """Accumulated ∫₀ᵀ‖Ge^{−itL}u‖²dt at doubling checkpoints."""

    G_kind: str
    integral_curve: list[tuple[float, float]]
    plateau_ratio: float
    bound_hat: float
    status: str


def _smoothness_report(
    G: DiscreteOperator, times: np.ndarray, values: np.ndarray, checkpoints: int, norm: float
) -> SmoothnessReport:
    samples = times.size - 1
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(times))])
    marks = [samples // 2**j for j in range(checkpoints, -1, -1) if samples // 2**j > 0]
    curve = [(float(times[i]), float(cumulative[i])) for i in marks]
    total = cumulative[-1]
    half = cumulative[samples // 2]
    ratio = 0.0 if total == 0.0 else float((total - half) / total)
    bound = float(total / norm**2) if norm > 0 else 0.0
    logger.info("kato %s: I(T)=%.4g plateau_ratio=%.3g", G.name, total, ratio)
    return SmoothnessReport(G.name, curve, ratio, bound, PASS if ratio < PLATEAU_TOL else FAIL)


def kato_smoothness_integrals(
    L: DiscreteOperator,
    weights: list[DiscreteOperator],
    u: WaveField,
    T_max: float,
    dt: float | None = None,
    samples: int = 256,
    checkpoints: int = 6,
) -> list[SmoothnessReport]:
    """One report per weight, all sampled along a single evolution of u.

    Raises:
        BoundaryLeak: the evolved state reaches the artificial boundary
    """
    times = np.linspace(0.0, T_max, samples + 1)
    states = [u] + [v for _, v in iter_evolution(L, u, times[1:], dt)]
    norm = u.norm()
    return [
        _smoothness_report(G, times, np.array([G.apply(v).norm() ** 2 for v in states]), checkpoints, norm)
        for G in weights
    ]


def kato_smoothness_integral(
    L: DiscreteOperator,
    G: DiscreteOperator,
    u: WaveField,
    T_max: float,
    dt: float | None = None,
    samples: int = 256,
    checkpoints: int = 6,
) -> SmoothnessReport:
    """Trapezoidal ∫₀^T‖Ge^{−itL}u‖²dt; PASS when the last doubling adds under 1%.

    Raises:
        BoundaryLeak: the evolved state reaches the artificial boundary
    """
    return kato_smoothness_integrals(L, [G], u, T_max, dt, samples, checkpoints)[0]


# === Radiation estimate ===


@dataclass(frozen=True)
class RadiationReport:
    C: float
    worst_margin: float
    scale: float
    status: str


def radiation_inequality_check(
    L: DiscreteOperator,
    M: DiscreteOperator,
    G0: DiscreteOperator,
    G1: DiscreteOperator,
    G2: DiscreteOperator,
    c0: float,
    epsilon: float,
    probes: int,
    rng: np.random.Generator,
    C_max: float = 1e3,
    guard_cells: int = 3,
    tol: float = 1e-8,
    bisection_steps: int = 40,
) -> RadiationReport:
    """Smallest C with (c0 − ε)G2*G2 − i[L, M] − C(G0*G0 + G1*G1) ≤ 0.

    The form is taken over vectors vanishing on the last guard_cells radial
    points. The worst margin over random and adversarial probes is reported
    relative to ‖i[L, M]‖₁.

    Raises:
        NoFiniteC: the inequality fails at C_max
    """
    commutator = commutator_iLA(L, M).matrix
    gain = (c0 - epsilon) * (G2.matrix.conj().T @ G2.matrix)
    control = G0.matrix.conj().T @ G0.matrix + G1.matrix.conj().T @ G1.matrix

    keep = np.arange((L.grid.n_active - guard_cells) * L.modes)
    base = (gain - commutator)[keep][:, keep].tocsr()
    control = control[keep][:, keep].tocsr()
    scale = max(1.0, float(sparse_norm(commutator, 1)))

    def form(C: float):
        return (base - C * control).tocsr()

    def top(C: float) -> tuple[float, np.ndarray]:
        matrix = form(C)
        n = matrix.shape[0]
        try:
            value, vector = eig_banded(to_banded(matrix), lower=True, select="i", select_range=(n - 1, n - 1))
        except (LinAlgError, ValueError) as exc:
            raise SolverFail(f"radiation form eigensolve failed: {exc}") from exc
        return float(value[0]), vector[:, 0]

    if top(C_max)[0] > tol * scale:
        raise NoFiniteC(f"form inequality fails at C = {C_max:g}")

    if top(0.0)[0] <= tol * scale:
        C = 0.0
    else:
        lo, hi = 0.0, C_max
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            if top(mid)[0] <= tol * scale:
                hi = mid
            else:
                lo = mid
        C = hi

    matrix = form(C)
    worst, adversarial = top(C)
    candidates = [adversarial] + [
        rng.standard_normal(matrix.shape[0]) + 1j * rng.standard_normal(matrix.shape[0]) for _ in range(probes)
    ]
    margins = [float(np.real(np.vdot(x, matrix @ x)) / np.vdot(x, x).real) for x in candidates]
    worst_margin = max(max(margins), worst) / scale
    logger.info("radiation: C=%.4g worst_margin=%.3g", C, worst_margin)
    return RadiationReport(C, worst_margin, scale, PASS if worst_margin <= tol else FAIL)
