"""Unitary time evolution, wave packets and momentum-sign projections.

Provides:
- evolve(): e^{−itH}u by Crank–Nicolson, or by the exact multiplier for momentum-diagonal H
- iter_evolution() / evolve_trajectory(): snapshots along one evolution
- make_packet(): normalized Gaussian packets
- taper(): smooth spatial truncation of prepared states
- project_sign(): projections onto ±ρ > 0

No absorbing layers are used; the boundary-mass guard stops any evolution
whose state gains mass near the artificial ends of the grid. The guard
measures growth over the mass the initial state already carries there, so
stationary states spread over the whole box evolve freely.
"""

import logging
import math
from collections.abc import Iterator
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from scipy.special import erfc

from .assemble import DiscreteOperator
from .errors import BoundaryLeak, GridMismatch, PacketClipped, SolverFail, StepTooLarge
from .grid import Grid1D, MomentumField, WaveField, fourier, inverse_fourier, momentum_filter
from .model import smooth_step

logger = logging.getLogger(__name__)

STEP_LIMIT = 0.5
LEAK_CELLS = 5
LEAK_TOL = 1e-8
CLIP_TOL = 1e-12
CHECKS_PER_RUN = 50


def default_dt(grid: Grid1D) -> float:
    return 0.5 * grid.h**2


@lru_cache(maxsize=32)
def _crank_nicolson(op: DiscreteOperator, dt: float):
    eye = sp.identity(op.dim, dtype=np.complex128, format="csc")
    lhs = (eye + 0.5j * dt * op.matrix).tocsc()
    rhs = (eye - 0.5j * dt * op.matrix).tocsr()
    try:
        return splu(lhs), rhs
    except RuntimeError as exc:
        raise SolverFail(f"factorization of {op.name} failed: {exc}") from exc


def boundary_mass(u: WaveField, cells: int = LEAK_CELLS) -> float:
    """Mass within `cells` grid cells of the artificial boundary."""
    h = u.grid.h
    weights = np.abs(u.values) ** 2
    if u.grid.is_half_line:
        return float(h * weights[-cells - 1 :].sum())
    return float(h * (weights[:cells].sum() + weights[-cells:].sum()))


def _guard_leak(u: WaveField, t: float, name: str, baseline: float):
    mass = boundary_mass(u)
    if mass - baseline > LEAK_TOL:
        raise BoundaryLeak(
            f"{name}: boundary mass {mass:.3g} (initially {baseline:.3g}) at t = {t:.6g}; enlarge r_max or shorten T"
        )


def _guard_step(H: DiscreteOperator, u: WaveField, dt: float):
    norm = u.norm()
    if norm == 0.0:
        return
    scale = abs(dt) * H.apply(u).norm() / norm
    if scale > STEP_LIMIT:
        raise StepTooLarge(f"{H.name}: dt·‖Hu‖/‖u‖ = {scale:.3g} exceeds {STEP_LIMIT}")


def _check_space(H: DiscreteOperator, u: WaveField):
    if u.grid != H.grid or u.modes != H.modes:
        raise GridMismatch(f"{H.name}: field does not live on the operator's grid")


def evolve(
    H: DiscreteOperator, u: WaveField, t: float, dt: float | None = None, baseline: float | None = None
) -> WaveField:
    """Compute e^{−itH}u.

    Args:
        H: Hermitian operator
        u: Initial state
        t: Time (negative values evolve backwards)
        dt: Step size, default 0.5·h²
        baseline: Boundary mass the guard tolerates on top of 1e−8
            (default: the boundary mass of u)

    Returns:
        Evolved state

    Raises:
        StepTooLarge: dt·‖Hu‖/‖u‖ > 0.5
        BoundaryLeak: mass near the artificial boundary grows by more than 1e−8
        SolverFail: factorization failure or non-finite values

    Examples:
        >>> evolve(L, u, 0.0) is u
        True
    """
    _check_space(H, u)
    if t == 0.0:
        return u
    baseline = boundary_mass(u) if baseline is None else baseline

    if H.momentum_symbol is not None:
        out = momentum_filter(u, np.exp(-1j * t * H.momentum_symbol))
        _guard_leak(out, t, H.name, baseline)
        return out

    dt = default_dt(H.grid) if dt is None else dt
    steps = max(1, math.ceil(abs(t) / dt - 1e-9))
    step = t / steps
    _guard_step(H, u, step)
    lu, rhs = _crank_nicolson(H, step)

    check_every = max(1, steps // CHECKS_PER_RUN)
    v = u.vector()
    for i in range(1, steps + 1):
        v = lu.solve(rhs @ v)
        if i % check_every == 0 or i == steps:
            if not np.all(np.isfinite(v)):
                raise SolverFail(f"{H.name}: non-finite state after {i} steps")
            _guard_leak(WaveField.from_vector(H.grid, H.modes, v), i * step, H.name, baseline)

    logger.debug("evolve %s: t=%.4g steps=%d dt=%.3g", H.name, t, steps, step)
    return WaveField.from_vector(H.grid, H.modes, v)


def iter_evolution(
    H: DiscreteOperator, u: WaveField, times, dt: float | None = None
) -> Iterator[tuple[float, WaveField]]:
    """Yield (t, e^{−itH}u) for increasing times, continuing from the previous snapshot.

    The leak guard compares every snapshot with the boundary mass of u.
    """
    baseline = boundary_mass(u)
    current, last = u, 0.0
    for t in times:
        current = evolve(H, current, t - last, dt, baseline)
        last = t
        yield t, current


def evolve_trajectory(
    H: DiscreteOperator, u: WaveField, t_end: float, snapshots: int, dt: float | None = None
) -> list[tuple[float, WaveField]]:
    """Snapshots at evenly spaced times 0, ..., t_end (inclusive)."""
    times = np.linspace(0.0, t_end, snapshots)
    return [(0.0, u)] + list(iter_evolution(H, u, times[1:], dt))


def make_packet(
    r0: float, rho0: float, width: float, grid: Grid1D, modes: int = 1, mode: int | None = None
) -> WaveField:
    """Normalized Gaussian e^{iρ0 r}e^{−(r−r0)²/(4w²)} on one mode.

    Args:
        r0: Center
        rho0: Mean momentum
        width: Position spread w
        grid: Grid to sample on
        modes: Total number of mode columns
        mode: Column carrying the packet (default: the middle column, m = 0)

    Raises:
        PacketClipped: tail mass outside the grid exceeds 1e−12
    """
    if width <= 0:
        raise ValueError(f"packet width must be positive, got {width}")
    lo, hi = grid.r_active[0], grid.r_active[-1]
    scale = math.sqrt(2.0) * width
    tail = 0.5 * (erfc((r0 - lo) / scale) + erfc((hi - r0) / scale))
    if tail > CLIP_TOL:
        raise PacketClipped(f"packet at r0={r0} with width {width} loses {tail:.3g} outside [{lo:.4g}, {hi:.4g}]")

    r = grid.r
    profile = np.exp(1j * rho0 * r - (r - r0) ** 2 / (4.0 * width**2))
    values = np.zeros((grid.n, modes), dtype=np.complex128)
    values[:, modes // 2 if mode is None else mode] = profile
    return WaveField(grid, values).normalized()


def taper(u: WaveField, lo: float, hi: float, ramp: float) -> WaveField:
    """Multiply by a smooth cutoff equal to 1 on [lo, hi] and 0 outside [lo − ramp, hi + ramp]."""
    if ramp <= 0:
        raise ValueError(f"taper ramp must be positive, got {ramp}")
    r = u.grid.r
    weight = smooth_step((r - (lo - ramp)) / ramp) * smooth_step(((hi + ramp) - r) / ramp)
    return WaveField(u.grid, u.values * weight[:, None])


def project_sign(u: WaveField, sign: int) -> WaveField:
    """Project onto ρ > 0 (sign=+1, ρ = 0 included) or ρ < 0 (sign=−1)."""
    uh = fourier(u)
    mask = uh.rho >= 0 if sign > 0 else uh.rho < 0
    return inverse_fourier(MomentumField(uh.grid, uh.values * mask[:, None]))
