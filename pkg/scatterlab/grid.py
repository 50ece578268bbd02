"""Grids and wave fields.

Provides:
- Grid1D: half-line Dirichlet grid (scattering space) or periodic full-line grid (reference space)
- WaveField: complex state over grid ⊗ angular modes with the h-weighted L² structure
- MomentumField: Fourier representation of a full-line field
- fourier() / inverse_fourier(): unitary DFT with continuum normalization

Fourier convention: û(ρ) = (2π)^{-1/2} ∫ e^{-irρ} u(r) dr, so that
u(r) = (2π)^{-1/2} ∫ e^{irρ} û(ρ) dρ.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GridMismatch

HALF_LINE = "half_line_dirichlet"
FULL_LINE = "full_line_periodic"


@dataclass(frozen=True)
class Grid1D:
    """Uniform radial grid.

    Half-line grids hold the points 0, h, ..., r_max with Dirichlet values at
    both ends; operators act on the n−2 interior points. Full-line grids are
    periodic on [r_min, r_max) with the right endpoint excluded.

    Attributes:
        r_min: Left endpoint
        r_max: Right endpoint
        n: Number of points
        kind: HALF_LINE or FULL_LINE
    """

    r_min: float
    r_max: float
    n: int
    kind: str = HALF_LINE

    def __post_init__(self):
        if self.kind not in (HALF_LINE, FULL_LINE):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.n < 3 or not self.r_max > self.r_min:
            raise ValueError(f"degenerate grid [{self.r_min}, {self.r_max}] with {self.n} points")
        if self.kind == HALF_LINE and self.r_min != 0.0:
            raise ValueError("half-line grids start at r = 0")

    @classmethod
    def half_line(cls, r_max: float, n: int) -> "Grid1D":
        return cls(0.0, float(r_max), int(n), HALF_LINE)

    @classmethod
    def full_line(cls, half_width: float, n: int) -> "Grid1D":
        return cls(-float(half_width), float(half_width), int(n), FULL_LINE)

    @classmethod
    def reference_for(cls, half: "Grid1D") -> "Grid1D":
        """Full-line grid [−r_max, r_max) sharing the spacing of a half-line grid."""
        return cls.full_line(half.r_max, 2 * (half.n - 1))

    @property
    def is_half_line(self) -> bool:
        return self.kind == HALF_LINE

    @property
    def h(self) -> float:
        if self.is_half_line:
            return (self.r_max - self.r_min) / (self.n - 1)
        return (self.r_max - self.r_min) / self.n

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.h * np.arange(self.n)

    @property
    def active(self) -> slice:
        """Rows carrying unknowns (interior for half-line, all for full-line)."""
        return slice(1, self.n - 1) if self.is_half_line else slice(0, self.n)

    @property
    def n_active(self) -> int:
        return self.n - 2 if self.is_half_line else self.n

    @property
    def r_active(self) -> np.ndarray:
        return self.r[self.active]

    @property
    def rho(self) -> np.ndarray:
        """Momentum grid in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.h)

    @property
    def drho(self) -> float:
        return 2.0 * np.pi / (self.n * self.h)

    @property
    def origin_index(self) -> int:
        """Index of the grid point r = 0."""
        index = int(round(-self.r_min / self.h))
        if abs(self.r_min + index * self.h) > 1e-9 * self.h:
            raise GridMismatch("grid does not contain r = 0")
        return index


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex state over grid ⊗ modes, stored as an (n, modes) array.

    Half-line fields vanish at both endpoints.
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.n:
            raise DimensionMismatch(f"values of shape {values.shape} do not fit a grid of {self.grid.n} points")
        if self.grid.is_half_line:
            values[0] = 0.0
            values[-1] = 0.0
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid1D, modes: int = 1) -> "WaveField":
        return cls(grid, np.zeros((grid.n, modes), dtype=np.complex128))

    @classmethod
    def from_vector(cls, grid: Grid1D, modes: int, vector: np.ndarray) -> "WaveField":
        """Rebuild a field from the flattened active unknowns (index = i_r·modes + j)."""
        values = np.zeros((grid.n, modes), dtype=np.complex128)
        values[grid.active] = np.asarray(vector).reshape(grid.n_active, modes)
        return cls(grid, values)

    @property
    def modes(self) -> int:
        return self.values.shape[1]

    def vector(self) -> np.ndarray:
        return self.values[self.grid.active].reshape(-1).copy()

    def norm(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "WaveField") -> complex:
        """⟨self, other⟩, antilinear in self."""
        self._check(other)
        return complex(self.grid.h * np.vdot(self.values, other.values))

    def normalized(self) -> "WaveField":
        return self * (1.0 / self.norm())

    def mode(self, index: int) -> "WaveField":
        """Field restricted to one mode column (others zeroed)."""
        values = np.zeros_like(self.values)
        values[:, index] = self.values[:, index]
        return WaveField(self.grid, values)

    def mode_norms(self) -> np.ndarray:
        return np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2, axis=0))

    def _check(self, other: "WaveField"):
        if other.grid != self.grid or other.modes != self.modes:
            raise DimensionMismatch("fields live on different grids or mode spaces")

    def __add__(self, other: "WaveField") -> "WaveField":
        self._check(other)
        return WaveField(self.grid, self.values + other.values)

    def __sub__(self, other: "WaveField") -> "WaveField":
        self._check(other)
        return WaveField(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "WaveField":
        return WaveField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "WaveField":
        return WaveField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class MomentumField:
    """Momentum representation û of a full-line field, rows in FFT order."""

    grid: Grid1D
    values: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return self.grid.rho

    def norm(self) -> float:
        return float(np.sqrt(self.grid.drho * np.sum(np.abs(self.values) ** 2)))

    def mean_momentum(self) -> float:
        weight = np.sum(np.abs(self.values) ** 2, axis=1)
        return float(np.sum(self.rho * weight) / np.sum(weight))

    def momentum_spread(self) -> float:
        weight = np.sum(np.abs(self.values) ** 2, axis=1)
        mean = np.sum(self.rho * weight) / np.sum(weight)
        return float(np.sqrt(np.sum((self.rho - mean) ** 2 * weight) / np.sum(weight)))


def _require_full_line(grid: Grid1D):
    if grid.is_half_line:
        raise GridMismatch("momentum representation needs a full-line grid")


def fourier(u: WaveField) -> MomentumField:
    """Unitary Fourier transform of a full-line field.

    Examples:
        >>> uh = fourier(u)
        >>> abs(uh.norm() - u.norm()) < 1e-12
        True
    """
    grid = u.grid
    _require_full_line(grid)
    phase = np.exp(-1j * grid.rho * grid.r_min)[:, None]
    values = grid.h / np.sqrt(2.0 * np.pi) * phase * np.fft.fft(u.values, axis=0)
    return MomentumField(grid, values)


def inverse_fourier(uh: MomentumField) -> WaveField:
    """Inverse of fourier()."""
    grid = uh.grid
    _require_full_line(grid)
    phase = np.exp(1j * grid.rho * grid.r_min)[:, None]
    values = grid.drho * grid.n / np.sqrt(2.0 * np.pi) * np.fft.ifft(phase * uh.values, axis=0)
    return WaveField(grid, values)


def momentum_filter(u: WaveField, multiplier: np.ndarray) -> WaveField:
    """Apply a momentum multiplier m(ρ) (shape (n,) or (n, modes)) to a full-line field."""
    uh = fourier(u)
    multiplier = np.asarray(multiplier)
    if multiplier.ndim == 1:
        multiplier = multiplier[:, None]
    return inverse_fourier(MomentumField(uh.grid, uh.values * multiplier))
