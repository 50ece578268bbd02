"""Result files.

A run directory holds:
- summary.json: pipeline, version, seed, resolved config, status, checks, results
- curves/*.csv: plot-ready columns, floats written with 17 significant digits
- fields/*.bin: WaveFields in the binary field format, trajectories with a times sidecar

Provides:
- write_summary() / read_summary()
- write_curve(), write_phase_table(), symbol_rows(), write_symbol_grid()
- cook_summary(), write_cook_result()
- write_trajectory()
"""

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .fieldio import write_field
from .grid import WaveField
from .pdo import Symbol
from .scattering import CookResult, isometry_defect


def jsonable(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats (→ null) for JSON output."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_summary(path: Path | str, summary: dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(jsonable(summary), indent=2, sort_keys=True) + "\n")
    return path


def read_summary(path: Path | str) -> dict[str, Any]:
    path = Path(path)
    if path.is_dir():
        path = path / "summary.json"
    return json.loads(path.read_text())


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_curve(path: Path | str, header: list[str], rows) -> Path:
    """Write rows of numbers as CSV with a header line.

    Examples:
        >>> write_curve("curves/lap.csv", ["eta", "bound"], [(0.1, 1.25)])
        PosixPath('curves/lap.csv')
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    return path


def read_curve(path: Path | str) -> tuple[list[str], list[list[float]]]:
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        return header, [[float(v) for v in row] for row in reader]


def write_phase_table(path: Path | str, rows) -> Path:
    return write_curve(path, ["r", "rho", "phi", "dr_phi", "remainder"], rows)


def symbol_rows(symbol: Symbol, r, rho) -> list[tuple[float, float, float, float]]:
    """Sample a symbol on the tensor grid r × ρ (real and imaginary parts)."""
    rr, pp = np.meshgrid(np.asarray(r, dtype=float), np.asarray(rho, dtype=float), indexing="ij")
    values = symbol(rr, pp)
    return list(zip(rr.ravel(), pp.ravel(), values.real.ravel(), values.imag.ravel()))


def write_symbol_grid(path: Path | str, symbol: Symbol, r, rho) -> Path:
    return write_curve(path, ["r", "rho", "re", "im"], symbol_rows(symbol, r, rho))


def cook_summary(result: CookResult, u: WaveField) -> dict[str, Any]:
    return {
        "T_used": result.T_used,
        "tail_estimate": result.tail_estimate,
        "exponent": result.exponent,
        "converged": result.converged,
        "status": result.status,
        "norm_in": u.norm(),
        "norm_out": result.w.norm(),
        "isometry_defect": isometry_defect(result, u),
    }


def write_cook_result(directory: Path | str, name: str, result: CookResult, u: WaveField) -> dict[str, Any]:
    """Write the integrand trace and the limit field; return the summary entry."""
    directory = Path(directory)
    write_curve(directory / "curves" / f"{name}_integrand.csv", ["t", "integrand"], result.integrand_samples)
    fields = directory / "fields"
    fields.mkdir(parents=True, exist_ok=True)
    write_field(fields / f"{name}.bin", result.w)
    return cook_summary(result, u)


def write_trajectory(directory: Path | str, name: str, snapshots: list[tuple[float, WaveField]]) -> Path:
    """Write fields/<name>_<i>.bin and the time sidecar curves/<name>_times.csv."""
    directory = Path(directory)
    fields = directory / "fields"
    fields.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, (t, u) in enumerate(snapshots):
        path = write_field(fields / f"{name}_{i:04d}.bin", u)
        rows.append((i, t, path.name))
    return write_curve(directory / "curves" / f"{name}_times.csv", ["index", "t", "file"], rows)
