"""Exception hierarchy.

Every error raised by scatterlab derives from ScatterError and carries a
module-qualified code ("<module>.<ClassName>") that the CLI reports:
- Model and configuration: NonPositiveK, ViolatedBound, IncompleteSpec, ConfigInvalid
- Grids and assembly: GridTooCoarse, NonHermitianCoeffs, DimensionMismatch, GridTooSmall
- Phases and PDOs: NonAdmissible, IntegerNuInverse, OutOfDomain, SupportMismatch
- Propagation: BoundaryLeak, SolverFail, PacketClipped
- Diagnostics and runner: WindowTouchesThreshold, ResolutionFloor, NoFiniteC, SchemaDrift, PipelineFailed
"""


class ScatterError(Exception):
    """Base class for all scatterlab errors."""

    module = "scatterlab"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class ModelError(ScatterError):
    module = "model"


class NonPositiveK(ModelError):
    """Scaling function is not strictly positive at a sample."""


class ViolatedBound(ModelError):
    """Scaling function is not strictly decreasing (c0 bound fails)."""


class IncompleteSpec(ModelError):
    """A decay index needed for classification is missing."""


class UnsupportedCoefficient(ModelError):
    """Coefficient data outside the supported preset family."""


class ConfigError(ScatterError):
    module = "config"


class ConfigInvalid(ConfigError):
    """Scenario document does not match the schema."""


class GridError(ScatterError):
    module = "grid"


class GridTooCoarse(GridError):
    """Grid spacing does not resolve the angular term."""


class NonHermitianCoeffs(GridError):
    """Fourier data of a coefficient breaks Hermitian symmetry."""


class DimensionMismatch(GridError):
    """Operators or fields live on different spaces."""


class GridTooSmall(GridError):
    """Reference grid is too small for the periodic fold."""


class GridMismatch(GridError):
    """Half-line and full-line grids do not share spacing or origin."""


class FieldFormatError(ScatterError):
    module = "fieldio"


class PhaseError(ScatterError):
    module = "phase"


class NonAdmissible(PhaseError):
    """Long-range a1 coefficient or momentum window not admissible."""


class IntegerNuInverse(PhaseError):
    """1/nu is an integer; the iteration depth is undefined."""


class OutOfDomain(PhaseError):
    """Query point outside the domain of the phase table."""


class NonPositiveSample(PhaseError):
    """Decay fit requested on a non-positive sample."""


class PdoError(ScatterError):
    module = "pdo"


class SupportMismatch(PdoError):
    """Symbol support not covered by the phase domain."""


class UnsupportedSymbolDegree(PdoError):
    """Symbol outside the polynomial family handled by the expansions."""


class WindowTouchesZero(PdoError):
    """Momentum window reaches zero momentum."""


class PropagationError(ScatterError):
    module = "propagate"


class BoundaryLeak(PropagationError):
    """Mass reached the artificial boundary."""


class SolverFail(PropagationError):
    """Sparse factorization or solve failed."""


class StepTooLarge(PropagationError):
    """Time step too large for the energy scale of the state."""


class PacketClipped(PropagationError):
    """Gaussian packet does not fit inside the grid."""


class ScatteringError(ScatterError):
    module = "scattering"


class WindowContainsEigenvalue(ScatteringError):
    """Analysis window contains a localized eigenvalue."""


class DiagnosticsError(ScatterError):
    module = "diagnostics"


class WindowTouchesThreshold(DiagnosticsError):
    """Window reaches the threshold 0."""


class ResolutionFloor(DiagnosticsError):
    """Requested imaginary part is below the level-spacing floor."""


class NoFiniteC(DiagnosticsError):
    """Radiation inequality not certified up to C_max."""


class DenseLimitExceeded(DiagnosticsError):
    """Problem too large for the dense eigendecomposition."""


class RunnerError(ScatterError):
    module = "runner"


class SchemaDrift(RunnerError):
    """Two run summaries are not comparable."""


class PipelineFailed(RunnerError):
    """A pipeline step failed outside the typed errors of its modules."""
