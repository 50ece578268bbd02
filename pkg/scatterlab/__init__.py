"""Numerical scattering theory on manifolds with a growing end.

The library discretizes L = D_r² + k(r)P + E on a truncated half-line times
a circle and checks, numerically, the statements of conjugate-operator
scattering theory: a positive commutator estimate on a spectral window,
resolvent bounds, Kato smoothness, radiation inequalities, existence and
completeness of (modified) wave operators.

Philosophy:
- Reproducibility: every run is a JSON scenario plus a seed
- Honesty: each check reports its numerical margin, not only PASS/FAIL
- Structured failure: every error carries a "module.Kind" code
"""

__version__ = "1.0.0"

from .assemble import DiscreteOperator, assemble_A, assemble_L, assemble_L0, assemble_M, assemble_reference
from .config import ScenarioConfig, load_config, parse_config
from .diagnostics import (
    kato_smoothness_integral,
    kato_smoothness_integrals,
    lap_resolvent_sup,
    mourre_form_check,
    radiation_inequality_check,
)
from .errors import ScatterError
from .grid import Grid1D, WaveField
from .model import CrossSection, CutoffSpec, ModelSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow
from .phase import build_phase
from .propagate import evolve, make_packet
from .runner import compare_runs, run_scenario
from .scattering import Identifier, IdentityIdentifier, completeness_probe, cook_wave_operator, modified_wave_operator

__all__ = [
    # Model
    "ModelSpec",
    "ScalingFunction",
    "CrossSection",
    "PerturbationCoeffs",
    "CutoffSpec",
    "SpectralWindow",
    # Discretization
    "Grid1D",
    "WaveField",
    "DiscreteOperator",
    "assemble_L",
    "assemble_L0",
    "assemble_A",
    "assemble_M",
    "assemble_reference",
    # Dynamics and scattering
    "evolve",
    "make_packet",
    "build_phase",
    "Identifier",
    "IdentityIdentifier",
    "cook_wave_operator",
    "modified_wave_operator",
    "completeness_probe",
    # Diagnostics
    "mourre_form_check",
    "lap_resolvent_sup",
    "kato_smoothness_integral",
    "kato_smoothness_integrals",
    "radiation_inequality_check",
    # Runs
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "run_scenario",
    "compare_runs",
    # Errors
    "ScatterError",
]
