"""Model definition and validation.

Provides the mathematical model on the end (r, θ) ∈ ℝ₊ × S¹:
- Smooth cutoffs: smooth_step(), chi(), CutoffSpec (χ_R, η, ψ, σ±)
- Scaling function k(r): ScalingFunction, validate_scaling()
- Cross-section spectrum: CrossSection, channel_eigenvalues()
- Perturbation coefficients: CoefficientTerm, PerturbationCoeffs, DecayClass,
  classify_perturbation()
- Energy windows: SpectralWindow
- The full problem instance: ModelSpec
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import IncompleteSpec, NonPositiveK, UnsupportedCoefficient, ViolatedBound

logger = logging.getLogger(__name__)

COEFFICIENT_NAMES = ("V", "a1L", "a1S", "a2", "a3", "b1", "b2")

SHORT_RANGE = "short_range"
LONG_RANGE_K = "long_range_k"
LONG_RANGE_A1 = "long_range_a1"


# === Smooth cutoffs ===


def _tail(x: np.ndarray) -> np.ndarray:
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.exp(-1.0 / safe), 0.0)


def _tail_deriv(x: np.ndarray) -> np.ndarray:
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.exp(-1.0 / safe) / safe**2, 0.0)


def smooth_step(t):
    """C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1, monotone in between.

    Examples:
        >>> float(smooth_step(0.5))
        0.5
    """
    t = np.asarray(t, dtype=float)
    a = _tail(t)
    b = _tail(1.0 - t)
    return a / (a + b)


def smooth_step_deriv(t):
    """Derivative of smooth_step()."""
    t = np.asarray(t, dtype=float)
    a = _tail(t)
    b = _tail(1.0 - t)
    return (_tail_deriv(t) * b + a * _tail_deriv(1.0 - t)) / (a + b) ** 2


def chi(r):
    """Cutoff χ: 0 for r ≤ 1/2, 1 for r ≥ 1."""
    return smooth_step(2.0 * np.asarray(r, dtype=float) - 1.0)


def chi_deriv(r):
    return 2.0 * smooth_step_deriv(2.0 * np.asarray(r, dtype=float) - 1.0)


def bracket(r):
    """Japanese bracket ⟨r⟩ = (1 + r²)^{1/2}."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + r * r)


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff functions tied to the onset radius R.

    Attributes:
        R: Onset radius; χ_R vanishes below R/2 and equals 1 above R
        psi_widen: Fraction of the window width used as the ψ taper
    """

    R: float
    psi_widen: float = 0.25

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"cutoff radius must be positive, got {self.R}")

    def chi_R(self, r):
        return chi(np.asarray(r, dtype=float) / self.R)

    def chi_R_deriv(self, r):
        return chi_deriv(np.asarray(r, dtype=float) / self.R) / self.R

    def eta(self, r):
        """η(r): 0 for |r| ≤ R, 1 for |r| ≥ 2R."""
        return smooth_step((np.abs(np.asarray(r, dtype=float)) - self.R) / self.R)

    def eta_deriv(self, r):
        r = np.asarray(r, dtype=float)
        return np.sign(r) * smooth_step_deriv((np.abs(r) - self.R) / self.R) / self.R

    def psi_margin(self, window: "SpectralWindow") -> float:
        margin = self.psi_widen * window.width
        if window.lo > 0:
            margin = min(margin, window.lo / 2.0)
        return margin

    def psi(self, energy, window: "SpectralWindow"):
        """Smooth bump in energy, 1 on [lo, hi], 0 outside the widened window."""
        delta = self.psi_margin(window)
        energy = np.asarray(energy, dtype=float)
        return smooth_step((energy - (window.lo - delta)) / delta) * smooth_step(
            ((window.hi + delta) - energy) / delta
        )

    def psi_support(self, window: "SpectralWindow") -> tuple[float, float]:
        delta = self.psi_margin(window)
        return window.lo - delta, window.hi + delta

    @staticmethod
    def sigma(r, rho, sign: int, drho: float):
        """Sign split σ±(r, ρ), mollified over one momentum cell."""
        s = smooth_step(np.sign(r) * np.asarray(rho, dtype=float) / drho + 0.5)
        return s if sign > 0 else 1.0 - s


# === Scaling function ===


@dataclass(frozen=True)
class ScalingFunction:
    """End-scaling profile k(r).

    Values and derivatives are taken at the radius |r| and clipped below
    r_clip, where every cutoff of the model vanishes.

    Attributes:
        kind: "power" or "tabulated"
        alpha: Exponent of k = c·r^(−α) (power kind)
        c: Amplitude (power kind)
        nu: Decay index ν_k (tabulated kind; equals alpha for power kind)
        c0_bound: Lower derivative constant, −k′ ≥ c0·k/r
        C_bound: Upper derivative constant
    """

    kind: str
    alpha: float = 0.0
    c: float = 1.0
    nu: float | None = None
    r_table: tuple[float, ...] = ()
    k_table: tuple[float, ...] = ()
    c0_bound: float | None = None
    C_bound: float | None = None
    r_clip: float = 0.25
    _spline: CubicSpline | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "tabulated":
            r = np.asarray(self.r_table, dtype=float)
            k = np.asarray(self.k_table, dtype=float)
            if r.size < 4 or r.size != k.size:
                raise UnsupportedCoefficient("tabulated k needs at least 4 matching (r, k) samples")
            if np.any(k <= 0):
                raise NonPositiveK("tabulated k must be positive")
            object.__setattr__(self, "_spline", CubicSpline(np.log(r), np.log(k)))
        elif self.kind != "power":
            raise UnsupportedCoefficient(f"unknown scaling kind {self.kind!r}")

    @classmethod
    def power(cls, alpha: float, c: float = 1.0) -> "ScalingFunction":
        return cls(
            kind="power",
            alpha=alpha,
            c=c,
            nu=alpha,
            c0_bound=alpha,
            C_bound=max(alpha, alpha * (alpha + 1.0)),
        )

    @classmethod
    def tabulated(cls, r, k, nu: float) -> "ScalingFunction":
        return cls(kind="tabulated", r_table=tuple(map(float, r)), k_table=tuple(map(float, k)), nu=nu)

    @property
    def nu_k(self) -> float | None:
        return self.alpha if self.kind == "power" else self.nu

    def _radius(self, r):
        return np.maximum(np.abs(np.asarray(r, dtype=float)), self.r_clip)

    def _clipped(self, r):
        return np.abs(np.asarray(r, dtype=float)) < self.r_clip

    def k(self, r):
        x = self._radius(r)
        if self.kind == "power":
            return self.c * x ** (-self.alpha)
        return np.exp(self._spline(np.log(x)))

    def dk(self, r):
        x = self._radius(r)
        if self.kind == "power":
            out = -self.alpha * self.c * x ** (-self.alpha - 1.0)
        else:
            out = self.k(x) * self._spline(np.log(x), 1) / x
        return np.where(self._clipped(r), 0.0, out)

    def d2k(self, r):
        x = self._radius(r)
        if self.kind == "power":
            out = self.alpha * (self.alpha + 1.0) * self.c * x ** (-self.alpha - 2.0)
        else:
            s1 = self._spline(np.log(x), 1)
            s2 = self._spline(np.log(x), 2)
            out = self.k(x) * (s2 + s1 * s1 - s1) / (x * x)
        return np.where(self._clipped(r), 0.0, out)


@dataclass(frozen=True)
class ScalingBounds:
    """Empirical derivative constants of a scaling function."""

    c0_hat: float
    C_hat: float
    c2_hat: float


def validate_scaling(
    k: ScalingFunction, r_lo: float = 1.0, r_hi: float = 100.0, n_samples: int = 1000
) -> ScalingBounds:
    """Measure the tightest constants in c0·k/r ≤ −k′ ≤ C·k/r and |k″| ≤ c2·k/r².

    Args:
        k: Scaling function
        r_lo: Lower sampling radius (≥ 1)
        r_hi: Upper sampling radius
        n_samples: Number of geometric samples (≥ 100)

    Returns:
        ScalingBounds with c0_hat, C_hat, c2_hat

    Examples:
        >>> b = validate_scaling(ScalingFunction.power(1.0), 1.0, 100.0, 1000)
        >>> round(b.c0_hat, 9), round(b.c2_hat, 9)
        (1.0, 2.0)
    """
    if r_lo < 1.0 or r_hi <= r_lo:
        raise ValueError(f"sampling range must satisfy 1 ≤ r_lo < r_hi, got [{r_lo}, {r_hi}]")
    if n_samples < 100:
        raise ValueError(f"need at least 100 samples, got {n_samples}")

    r = np.geomspace(r_lo, r_hi, n_samples)
    kv = k.k(r)
    if np.any(~np.isfinite(kv)) or np.any(kv <= 0):
        raise NonPositiveK(f"k(r) ≤ 0 at r = {r[np.argmin(kv)]:.6g}")

    ratio = -r * k.dk(r) / kv
    curvature = r * r * np.abs(k.d2k(r)) / kv
    c0_hat = float(ratio.min())
    bounds = ScalingBounds(c0_hat=c0_hat, C_hat=float(ratio.max()), c2_hat=float(curvature.max()))
    if not c0_hat > 0 or not all(math.isfinite(v) for v in (bounds.c0_hat, bounds.C_hat, bounds.c2_hat)):
        raise ViolatedBound(f"−r·k′/k reaches {c0_hat:.6g}; k must be strictly decreasing")

    logger.debug("validate_scaling on [%g, %g]: %s", r_lo, r_hi, bounds)
    return bounds


# === Cross section ===


@dataclass(frozen=True)
class CrossSection:
    """Unit circle with density 1, truncated to Fourier modes |m| ≤ M."""

    mode_cutoff: int

    def __post_init__(self):
        if self.mode_cutoff < 0:
            raise ValueError(f"mode cutoff must be ≥ 0, got {self.mode_cutoff}")

    @property
    def modes(self) -> int:
        return 2 * self.mode_cutoff + 1

    @property
    def mode_numbers(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff, self.mode_cutoff + 1)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalue m² of P on each mode, in mode order."""
        return self.mode_numbers.astype(float) ** 2

    def mode_index(self, m: int) -> int:
        if abs(m) > self.mode_cutoff:
            raise ValueError(f"mode {m} outside cutoff {self.mode_cutoff}")
        return m + self.mode_cutoff


def channel_eigenvalues(cs: CrossSection) -> list[tuple[int, int]]:
    """Distinct eigenvalues of P with multiplicities.

    Examples:
        >>> channel_eigenvalues(CrossSection(2))
        [(0, 1), (1, 2), (4, 2)]
    """
    return [(m * m, 1 if m == 0 else 2) for m in range(cs.mode_cutoff + 1)]


# === Perturbation coefficients ===


@dataclass(frozen=True)
class CoefficientTerm:
    """One coefficient term c·χ(r)·⟨r⟩^(−ν)·f(θ).

    f is stored by its Fourier coefficients f̂_j, f(θ) = Σ f̂_j e^{ijθ}.
    """

    name: str
    c: float
    nu: float | None
    fourier: tuple[tuple[int, complex], ...] = ((0, 1.0),)

    def __post_init__(self):
        if self.name not in COEFFICIENT_NAMES:
            raise UnsupportedCoefficient(f"unknown coefficient {self.name!r}")

    @classmethod
    def from_cosine(cls, name: str, c: float, nu: float | None, theta_modes) -> "CoefficientTerm":
        """Build from cosine modes [[m, amp], ...] meaning Σ amp·cos(mθ)."""
        coeffs: dict[int, complex] = {}
        for m, amp in theta_modes:
            m = int(m)
            if m == 0:
                coeffs[0] = coeffs.get(0, 0.0) + amp
            else:
                m = abs(m)
                coeffs[m] = coeffs.get(m, 0.0) + amp / 2.0
                coeffs[-m] = coeffs.get(-m, 0.0) + amp / 2.0
        return cls(name=name, c=c, nu=nu, fourier=tuple(sorted(coeffs.items())))

    @property
    def max_mode(self) -> int:
        return max((abs(j) for j, _ in self.fourier), default=0)

    @property
    def theta_independent(self) -> bool:
        return all(j == 0 or v == 0 for j, v in self.fourier)

    @property
    def mean(self) -> float:
        return float(np.real(sum(v for j, v in self.fourier if j == 0)))

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        table = dict(self.fourier)
        return all(abs(complex(table.get(-j, 0.0)) - np.conj(v)) <= tol for j, v in table.items())

    def _decay(self) -> float:
        if self.nu is None:
            raise IncompleteSpec(f"coefficient {self.name} has no decay index")
        return self.nu

    def profile(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return self.c * chi(r) * bracket(r) ** (-self._decay())

    def profile_deriv(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        nu = self._decay()
        br = bracket(r)
        return self.c * (chi_deriv(r) * br ** (-nu) - nu * chi(r) * r * br ** (-nu - 2.0))

    def coupling(self, mode_cutoff: int) -> np.ndarray:
        """Mode-coupling matrix F[n, n′] = f̂_{n−n′} over |n|, |n′| ≤ M."""
        if self.max_mode > mode_cutoff:
            raise UnsupportedCoefficient(
                f"coefficient {self.name} uses mode {self.max_mode} beyond cutoff {mode_cutoff}"
            )
        modes = np.arange(-mode_cutoff, mode_cutoff + 1)
        table = dict(self.fourier)
        diff = modes[:, None] - modes[None, :]
        return np.vectorize(lambda j: complex(table.get(int(j), 0.0)), otypes=[complex])(diff)

    def angular(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.real(sum(v * np.exp(1j * j * theta) for j, v in self.fourier))


@dataclass(frozen=True)
class DecayClass:
    """Decay indices of the perturbation; inactive coefficients carry +inf."""

    nu_a1L: float | None
    nu_a1S: float | None
    nu_a2: float | None
    nu_a3: float | None
    nu_b1: float | None
    nu_b2: float | None
    nu_V: float | None
    nu_k: float | None
    classification: str | None = None

    def missing(self) -> list[str]:
        return [name for name, value in self.__dict__.items() if name.startswith("nu_") and value is None]

    @property
    def nu(self) -> float:
        """Smallest active decay index."""
        values = [v for k, v in self.__dict__.items() if k.startswith("nu_") and v is not None]
        return min(values)


@dataclass(frozen=True)
class RadialProfile:
    """Sum of θ-independent coefficient profiles, evaluated at |r|."""

    terms: tuple[CoefficientTerm, ...] = ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return sum((t.mean * t.profile(r) for t in self.terms), np.zeros_like(r))

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        return sum((t.mean * t.profile_deriv(r) for t in self.terms), np.zeros_like(r))

    @property
    def active(self) -> bool:
        return any(t.c != 0 and t.mean != 0 for t in self.terms)

    @property
    def nu(self) -> float:
        return min((t._decay() for t in self.terms), default=math.inf)


@dataclass(frozen=True)
class PerturbationCoeffs:
    """Coefficients of E, one or more terms per coefficient name."""

    terms: tuple[CoefficientTerm, ...] = ()

    def __post_init__(self):
        for term in self.by_name("a1L"):
            if not term.theta_independent:
                raise UnsupportedCoefficient("a1L must not depend on θ")

    def by_name(self, name: str) -> tuple[CoefficientTerm, ...]:
        return tuple(t for t in self.terms if t.name == name)

    def active(self, name: str) -> bool:
        return any(t.c != 0 for t in self.by_name(name))

    @property
    def theta_independent(self) -> bool:
        return all(t.theta_independent for t in self.terms)

    @property
    def a1L(self) -> RadialProfile:
        return RadialProfile(self.by_name("a1L"))

    def decay_class(self, k: ScalingFunction) -> DecayClass:
        values: dict[str, float | None] = {}
        for name in COEFFICIENT_NAMES:
            active = [t for t in self.by_name(name) if t.c != 0]
            if any(t.nu is None for t in active):
                values[f"nu_{name}"] = None
            else:
                values[f"nu_{name}"] = min((t.nu for t in active), default=math.inf)
        return DecayClass(nu_k=k.nu_k, **values)

    def decay_constants(self, r_max: float, n_r: int = 400, n_theta: int = 64) -> dict[str, float]:
        """Sampled C in |coef(r, θ)| ≤ C·r^(−ν) on [1, r_max], per term."""
        r = np.geomspace(1.0, r_max, n_r)
        theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
        out = {}
        for i, term in enumerate(self.terms):
            values = np.abs(term.profile(r)[:, None] * term.angular(theta)[None, :])
            out[f"{term.name}[{i}]"] = float((values * r[:, None] ** term._decay()).max())
        return out


def classify_perturbation(coeffs: PerturbationCoeffs, k: ScalingFunction) -> str:
    """Classify the model as short_range, long_range_k or long_range_a1.

    Raises:
        IncompleteSpec: a decay index is missing
        UnsupportedCoefficient: E is long-range while a1L vanishes

    Examples:
        >>> coeffs = PerturbationCoeffs((CoefficientTerm("V", 0.3, 1.5),))
        >>> classify_perturbation(coeffs, ScalingFunction.power(1.2))
        'short_range'
    """
    decay = coeffs.decay_class(k)
    missing = decay.missing()
    if missing:
        raise IncompleteSpec(f"missing decay indices: {', '.join(missing)}")

    if coeffs.active("a1L"):
        return LONG_RANGE_A1
    short_e = (
        min(decay.nu_a1S, decay.nu_a2, decay.nu_b1, decay.nu_b2, decay.nu_V) > 1.0 and decay.nu_a3 >= 1.0
    )
    if not short_e:
        raise UnsupportedCoefficient(
            "E decays too slowly for the short-range indices; put the long-range part into a1L"
        )
    return SHORT_RANGE if decay.nu_k > 1.0 else LONG_RANGE_K


# === Windows and the full model ===


@dataclass(frozen=True)
class SpectralWindow:
    """Energy window [lo, hi] with the eigenvalues excluded from it.

    Windows reaching 0 are accepted here. Operations that need lo > 0 reject
    them with WindowTouchesThreshold (mourre, completeness) or
    WindowTouchesZero (identifier symbols).
    """

    lo: float
    hi: float
    excluded: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, energy: float) -> bool:
        return self.lo <= energy <= self.hi

    def with_excluded(self, values) -> "SpectralWindow":
        return SpectralWindow(self.lo, self.hi, tuple(float(v) for v in values))

    def bump(self, energy, taper: float = 0.2):
        """Smooth filter supported in [lo, hi], 1 away from the edges."""
        tau = taper * self.width
        energy = np.asarray(energy, dtype=float)
        return smooth_step((energy - self.lo) / tau) * smooth_step((self.hi - energy) / tau)


@dataclass(frozen=True)
class ModelSpec:
    """A complete problem instance."""

    k: ScalingFunction
    cross_section: CrossSection
    coeffs: PerturbationCoeffs
    cutoff: CutoffSpec
    window: SpectralWindow

    @property
    def decay(self) -> DecayClass:
        decay = self.coeffs.decay_class(self.k)
        return DecayClass(**{**decay.__dict__, "classification": classify_perturbation(self.coeffs, self.k)})

    @property
    def classification(self) -> str:
        return classify_perturbation(self.coeffs, self.k)
