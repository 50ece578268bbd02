"""Scenario configuration.

A scenario is a JSON document:

    {
      "name": "free-mourre",
      "pipeline": "mourre",
      "seed": 0,
      "k": {"kind": "power", "alpha": 1.0, "c": 1.0},
      "cross_section": {"modes": 1},
      "coeffs": [{"name": "V", "c": -0.5, "nu": 2.0, "theta_modes": [[0, 1.0]]}],
      "cutoff_R": 4.0,
      "window": [0.9, 1.1],
      "grid": {"r_max": 150.0, "n": 1001},
      "params": {"epsilon": 0.1}
    }

Unknown keys are rejected at every level, and pipeline parameters are
merged over per-pipeline defaults.

Provides:
- PIPELINES, PARAM_DEFAULTS, PARAM_RULES
- GridConfig, ScenarioConfig
- parse_config(), load_config()
"""

import json
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigInvalid
from .grid import Grid1D
from .model import (
    CoefficientTerm,
    CrossSection,
    CutoffSpec,
    ModelSpec,
    PerturbationCoeffs,
    ScalingFunction,
    SpectralWindow,
)

PARAM_DEFAULTS: dict[str, dict[str, Any]] = {
    "validate": {"r_lo": 1.0, "r_hi": 100.0, "n_samples": 1000},
    "mourre": {
        "epsilon": 0.1,
        "compact_dim_budget": 10,
        "c0": None,
        "tol": 0.05,
        "refine": True,
        "max_dim": 6000,
    },
    "lap": {"energy": 1.0, "s": 1.0, "etas": [0.1, 0.05, 0.025], "probes": 2, "control_s": None},
    "smoothness": {
        "weights": ["G0", "G1", "G2"],
        "s": 1.0,
        "r0": 8.0,
        "rho0": 2.4,
        "width": 1.2,
        "mode": 0,
        "T_max": 300.0,
        "snapshots": 0,
        "control": True,
    },
    "radiation": {"epsilon": 0.5, "c0": None, "s": 1.0, "probes": 8, "C_max": 1e3, "guard_cells": 3},
    "cook": {
        "r0": 20.0,
        "rho0": 1.5,
        "width": 3.0,
        "mode": 0,
        "direction": 1,
        "T_max": 40.0,
        "tol": 1e-3,
        "isometry_tol": 1e-3,
        "wrong_sign_tol": 1e-2,
        "chain_rule": True,
        "chain_tol": 5e-3,
    },
    "modified-cook": {
        "r0": 20.0,
        "rho0": 1.5,
        "width": 2.0,
        "mode": 1,
        "direction": 1,
        "T_max": 200.0,
        "tol": 1e-2,
        "isometry_tol": 1e-2,
        "wrong_sign_tol": 2e-2,
        "contrast": True,
    },
    "completeness": {
        "ensemble_size": 8,
        "T_max": 30.0,
        "tol": 1e-3,
        "r_loc": 20.0,
        "r_seed": 10.0,
        "direction": 1,
        "threshold": 0.98,
    },
    "phase": {
        "rho": 1.0,
        "rho_window": [0.5, 1.5],
        "lam": 1.0,
        "r_lo": None,
        "r_hi": None,
        "n_fit": 200,
        "table_r_max": 2000.0,
        "export_r": 16,
        "export_rho": 5,
    },
    "compose": {"radii": [10.0, 20.0, 40.0], "rho0": 1.5, "lam": 1.0, "improvement": 1.5},
}

PIPELINES = tuple(PARAM_DEFAULTS)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_list_of(value: Any, item_ok: Callable[[Any], bool]) -> bool:
    return isinstance(value, list) and bool(value) and all(item_ok(item) for item in value)


_POSITIVE = ("a positive number", lambda v: _is_real(v) and v > 0)
_POSITIVE_OR_NONE = ("null or a positive number", lambda v: v is None or (_is_real(v) and v > 0))
_COUNT = ("a positive integer", lambda v: _is_int(v) and v >= 1)
_CELLS = ("a non-negative integer", lambda v: _is_int(v) and v >= 0)
_DIRECTION = ("+1 or −1", lambda v: v in (1, -1) and not isinstance(v, bool))
_FRACTION = ("a number in (0, 1]", lambda v: _is_real(v) and 0 < v <= 1)
_POSITIVE_LIST = (
    "a non-empty list of positive numbers",
    lambda v: _is_list_of(v, lambda x: _is_real(x) and x > 0),
)

_PACKET_RULES = {"width": _POSITIVE, "T_max": _POSITIVE, "direction": _DIRECTION, "tol": _POSITIVE}

PARAM_RULES: dict[str, dict[str, tuple[str, Any]]] = {
    "validate": {
        "r_lo": ("a number ≥ 1", lambda v: _is_real(v) and v >= 1),
        "n_samples": ("an integer ≥ 100", lambda v: _is_int(v) and v >= 100),
    },
    "mourre": {
        "epsilon": _POSITIVE,
        "compact_dim_budget": _CELLS,
        "c0": _POSITIVE_OR_NONE,
        "tol": _POSITIVE,
        "max_dim": _COUNT,
    },
    "lap": {
        "energy": _POSITIVE,
        "s": _POSITIVE,
        "etas": _POSITIVE_LIST,
        "probes": _COUNT,
        "control_s": _POSITIVE_OR_NONE,
    },
    "smoothness": {
        "weights": (
            "a non-empty list of G0, G1, G2",
            lambda v: _is_list_of(v, lambda x: x in ("G0", "G1", "G2")),
        ),
        "s": _POSITIVE,
        "width": _POSITIVE,
        "T_max": _POSITIVE,
        "snapshots": _CELLS,
    },
    "radiation": {
        "epsilon": _POSITIVE,
        "c0": _POSITIVE_OR_NONE,
        "s": _POSITIVE,
        "probes": _COUNT,
        "C_max": _POSITIVE,
        "guard_cells": _CELLS,
    },
    "cook": {**_PACKET_RULES, "isometry_tol": _POSITIVE, "wrong_sign_tol": _POSITIVE, "chain_tol": _POSITIVE},
    "modified-cook": {**_PACKET_RULES, "isometry_tol": _POSITIVE, "wrong_sign_tol": _POSITIVE},
    "completeness": {
        "ensemble_size": _COUNT,
        "T_max": _POSITIVE,
        "tol": _POSITIVE,
        "r_loc": _POSITIVE,
        "r_seed": _POSITIVE,
        "direction": _DIRECTION,
        "threshold": _FRACTION,
    },
    "phase": {
        "rho": _POSITIVE,
        "lam": _POSITIVE,
        "n_fit": ("an integer ≥ 50", lambda v: _is_int(v) and v >= 50),
        "table_r_max": _POSITIVE,
        "export_r": _COUNT,
        "export_rho": _COUNT,
    },
    "compose": {"radii": _POSITIVE_LIST, "lam": _POSITIVE, "improvement": _POSITIVE},
}

_TOP_KEYS = {"name", "pipeline", "seed", "k", "cross_section", "coeffs", "cutoff_R", "window", "grid", "params"}
_REQUIRED = ("name", "pipeline", "k", "cutoff_R", "window", "grid")


@dataclass(frozen=True)
class GridConfig:
    r_max: float
    n: int
    dt: float | None = None

    def half_line(self, refine: int = 1) -> Grid1D:
        """Half-line grid; refine=2 halves the spacing."""
        return Grid1D.half_line(self.r_max, refine * (self.n - 1) + 1)

    def full_line(self, refine: int = 1) -> Grid1D:
        return Grid1D.reference_for(self.half_line(refine))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    pipeline: str
    seed: int
    model: ModelSpec
    grid: GridConfig
    params: dict[str, Any]
    document: dict[str, Any] = field(repr=False)

    def resolved(self) -> dict[str, Any]:
        """The input document with defaults filled in."""
        doc = json.loads(json.dumps(self.document))
        doc["seed"] = self.seed
        doc["params"] = dict(self.params)
        doc.setdefault("cross_section", {"modes": self.model.cross_section.mode_cutoff})
        doc.setdefault("coeffs", [])
        return doc

    def with_seed(self, seed: int | None) -> "ScenarioConfig":
        if seed is None:
            return self
        return ScenarioConfig(self.name, self.pipeline, seed, self.model, self.grid, self.params, self.document)


def _check_keys(obj: Any, allowed: set[str], path: str):
    if not isinstance(obj, dict):
        raise ConfigInvalid(f"{path}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigInvalid(f"{path}.{unknown[0]}: unknown key")


def _number(obj: dict, key: str, path: str, default=None, required: bool = True) -> float | None:
    if key not in obj:
        if required and default is None:
            raise ConfigInvalid(f"{path}.{key}: required")
        return default
    value = obj[key]
    if value is None and not required:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigInvalid(f"{path}.{key}: expected a finite number, got {value!r}")
    return float(value)


def _parse_k(obj: Any) -> ScalingFunction:
    _check_keys(obj, {"kind", "alpha", "c", "r", "k", "nu"}, "k")
    kind = obj.get("kind")
    if kind == "power":
        return ScalingFunction.power(_number(obj, "alpha", "k"), _number(obj, "c", "k", default=1.0))
    if kind == "tabulated":
        r, k = obj.get("r"), obj.get("k")
        if not isinstance(r, list) or not isinstance(k, list):
            raise ConfigInvalid("k: tabulated scaling needs lists 'r' and 'k'")
        return ScalingFunction.tabulated(r, k, _number(obj, "nu", "k"))
    raise ConfigInvalid(f"k.kind: expected 'power' or 'tabulated', got {kind!r}")


def _parse_coeff(obj: Any, path: str) -> CoefficientTerm:
    _check_keys(obj, {"name", "c", "nu", "theta_modes", "fourier"}, path)
    name = obj.get("name")
    c = _number(obj, "c", path)
    nu = _number(obj, "nu", path, required=False)
    if "theta_modes" in obj and "fourier" in obj:
        raise ConfigInvalid(f"{path}: give either theta_modes or fourier, not both")
    if "fourier" in obj:
        try:
            fourier = tuple((int(j), complex(re, im)) for j, re, im in obj["fourier"])
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"{path}.fourier: expected [[j, re, im], ...]") from exc
        return CoefficientTerm(name, c, nu, fourier)
    modes = obj.get("theta_modes", [[0, 1.0]])
    try:
        return CoefficientTerm.from_cosine(name, c, nu, [(int(m), float(a)) for m, a in modes])
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{path}.theta_modes: expected [[m, amp], ...]") from exc


def _check_param_values(pipeline: str, params: dict[str, Any]):
    for key, (expected, ok) in PARAM_RULES[pipeline].items():
        if not ok(params[key]):
            raise ConfigInvalid(f"params.{key}: expected {expected}, got {params[key]!r}")
    if pipeline in ("validate", "phase"):
        lo, hi = params["r_lo"], params["r_hi"]
        if lo is not None and hi is not None and not hi > lo:
            raise ConfigInvalid(f"params.r_hi: expected a number above r_lo = {lo}, got {hi!r}")


def _parse_params(pipeline: str, obj: Any) -> dict[str, Any]:
    defaults = PARAM_DEFAULTS[pipeline]
    obj = {} if obj is None else obj
    _check_keys(obj, set(defaults), "params")
    params = {**defaults, **obj}
    _check_param_values(pipeline, params)
    return params


def parse_config(doc: dict[str, Any]) -> ScenarioConfig:
    """Validate a scenario document and build the model.

    Raises:
        ConfigInvalid: schema violation, naming the offending path
    """
    _check_keys(doc, _TOP_KEYS, "$")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigInvalid(f"$.{key}: required")
    pipeline = doc["pipeline"]
    if pipeline not in PIPELINES:
        raise ConfigInvalid(f"$.pipeline: expected one of {', '.join(PIPELINES)}, got {pipeline!r}")

    grid_doc = doc["grid"]
    _check_keys(grid_doc, {"r_max", "n", "dt"}, "grid")
    n = grid_doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 5:
        raise ConfigInvalid(f"grid.n: expected an integer ≥ 5, got {n!r}")
    grid = GridConfig(_number(grid_doc, "r_max", "grid"), n, _number(grid_doc, "dt", "grid", required=False))

    window = doc["window"]
    if not isinstance(window, list) or len(window) != 2:
        raise ConfigInvalid("window: expected [lo, hi]")

    cross = doc.get("cross_section", {"modes": 0})
    _check_keys(cross, {"modes"}, "cross_section")

    coeffs = doc.get("coeffs", [])
    if not isinstance(coeffs, list):
        raise ConfigInvalid("coeffs: expected a list")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigInvalid(f"seed: expected a non-negative integer, got {seed!r}")

    try:
        model = ModelSpec(
            k=_parse_k(doc["k"]),
            cross_section=CrossSection(int(cross.get("modes", 0))),
            coeffs=PerturbationCoeffs(tuple(_parse_coeff(c, f"coeffs[{i}]") for i, c in enumerate(coeffs))),
            cutoff=CutoffSpec(float(doc["cutoff_R"])),
            window=SpectralWindow(float(window[0]), float(window[1])),
        )
        params = _parse_params(pipeline, doc.get("params"))
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(f"$: {exc}") from exc

    return ScenarioConfig(str(doc["name"]), pipeline, seed, model, grid, params, doc)


def load_config(path: Path | str) -> ScenarioConfig:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"{path}: {exc}") from exc
    return parse_config(doc)
