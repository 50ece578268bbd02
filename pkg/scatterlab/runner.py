"""Scenario runner.

Each pipeline is a small dependency graph of steps executed on a thread
pool; the results are written into a timestamped run directory:

    <out>/<name>-<pipeline>-<timestamp>/
        summary.json
        curves/*.csv
        fields/*.bin

Provides:
- run_scenario(): execute one scenario, exit code 0 (all PASS), 2 (any FAIL), 1 (error)
- compare_runs(): numeric diff of two run summaries
- run_steps(): the step scheduler
"""

import logging
import math
import time
from collections.abc import Callable
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .assemble import (
    DiscreteOperator,
    assemble_A,
    assemble_L,
    assemble_L0,
    assemble_M,
    assemble_reference,
    assemble_weight,
)
from .config import ScenarioConfig, load_config
from .diagnostics import (
    FAIL,
    PASS,
    embedded_eigen_scan,
    kato_smoothness_integrals,
    lap_resolvent_sup,
    mourre_form_check,
    radiation_inequality_check,
    window_eigenpairs,
)
from .errors import GridTooSmall, PipelineFailed, ScatterError, SchemaDrift
from .fieldio import write_field
from .grid import Grid1D, WaveField, momentum_filter
from .model import CutoffSpec, ModelSpec, SpectralWindow, validate_scaling
from .pdo import (
    OscillatingOp,
    PolynomialSymbol,
    apply_osc,
    apply_pdo,
    build_identifier_family,
    channel_symbol,
    compose_left,
    momentum_support,
)
from .phase import build_phase, modifier_decay, phase_table, remainder, remainder_report
from .propagate import evolve_trajectory, make_packet, project_sign, taper
from .report import read_summary, symbol_rows, write_cook_result, write_curve, write_summary, write_trajectory
from .scattering import (
    CookResult,
    Identifier,
    ModifiedIdentifier,
    chain_rule_check,
    completeness_probe,
    cook_wave_operator,
    modified_wave_operator,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

DEFAULT_TOLERANCES = {"alpha_hat": 0.1, "alpha_hat_2n": 0.1}


# === Step scheduling ===


@dataclass(frozen=True)
class Step:
    """A unit of work; fn receives the results of its dependencies by name."""

    name: str
    fn: Callable[[dict[str, Any]], Any]
    deps: tuple[str, ...] = ()


def run_steps(steps: list[Step], threads: int = 1) -> dict[str, Any]:
    """Run steps as soon as their dependencies finish.

    Raises:
        ValueError: unknown or cyclic dependencies
    """
    pending = {step.name: step for step in steps}
    done: dict[str, Any] = {}
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        running = {}
        while pending or running:
            for name, step in list(pending.items()):
                if all(dep in done for dep in step.deps):
                    logger.info("step %s: start", name)
                    running[pool.submit(step.fn, {dep: done[dep] for dep in step.deps})] = name
                    del pending[name]
            if not running:
                raise ValueError(f"unsatisfiable dependencies among steps {sorted(pending)}")
            finished, _ = wait(running, return_when=FIRST_COMPLETED)
            for future in finished:
                name = running.pop(future)
                done[name] = future.result()
                logger.info("step %s: done", name)
    return done


# === Pipeline plumbing ===


@dataclass
class PipelineResult:
    results: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    curves: dict[str, tuple[list[str], list]] = field(default_factory=dict)
    fields: dict[str, WaveField] = field(default_factory=dict)
    cook: dict[str, tuple[CookResult, WaveField]] = field(default_factory=dict)
    trajectories: dict[str, list[tuple[float, WaveField]]] = field(default_factory=dict)


@dataclass
class RunContext:
    config: ScenarioConfig
    threads: int = 1
    _seeds: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._seeds = np.random.SeedSequence(self.config.seed).spawn(16)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng(self._seeds[stream])

    @property
    def params(self) -> dict[str, Any]:
        return self.config.params

    @property
    def model(self) -> ModelSpec:
        return self.config.model


def _c0(model: ModelSpec, override: float | None) -> float:
    if override is not None:
        return float(override)
    if model.k.c0_bound is not None:
        return model.k.c0_bound
    return validate_scaling(model.k).c0_hat


def reference_packet(
    model: ModelSpec, grid: Grid1D, r0: float, rho0: float, width: float, m: int, sign: int
) -> WaveField:
    """Packet in E_Λ(H₀)H_f^±, normalized.

    The Gaussian is filtered by the window bump, projected onto sign·ρ ≥ 0
    and cut off smoothly outside r0 ± 8w, so it carries no mass near the
    ends of the grid.
    """
    cs = model.cross_section
    u = make_packet(r0, sign * rho0, width, grid, cs.modes, cs.mode_index(m))
    filtered = project_sign(momentum_filter(u, model.window.bump(grid.rho**2)), sign)
    return taper(filtered, r0 - 5.0 * width, r0 + 5.0 * width, 3.0 * width).normalized()


# === Pipelines ===


def _validate(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    done = run_steps(
        [
            Step("scaling", lambda _: validate_scaling(model.k, p["r_lo"], p["r_hi"], p["n_samples"])),
            Step("decay", lambda _: model.decay),
            Step("constants", lambda _: model.coeffs.decay_constants(ctx.config.grid.r_max)),
        ],
        ctx.threads,
    )
    bounds, decay = done["scaling"], done["decay"]
    out = PipelineResult()
    out.results = {
        "c0_hat": bounds.c0_hat,
        "C_hat": bounds.C_hat,
        "c2_hat": bounds.c2_hat,
        "classification": decay.classification,
        "decay": {k: v for k, v in decay.__dict__.items() if k.startswith("nu_")},
        "decay_constants": done["constants"],
    }
    out.checks["scaling_bounds"] = bounds.c0_hat > 0
    if model.k.c0_bound is not None:
        out.checks["declared_c0"] = abs(bounds.c0_hat - model.k.c0_bound) <= 1e-6
    return out


def _mourre(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    c0 = _c0(model, p["c0"])

    def check(refine: int):
        grid = ctx.config.grid.half_line(refine)
        L = assemble_L(grid, model)
        A = assemble_A(grid, model.cutoff, L.modes)
        return mourre_form_check(
            L, A, model.window, p["epsilon"], p["compact_dim_budget"], c0, p["tol"], p["max_dim"]
        )

    steps = [Step("n", lambda _: check(1))]
    if p["refine"]:
        steps.append(Step("2n", lambda _: check(2)))
    done = run_steps(steps, ctx.threads)

    out = PipelineResult()
    report = done["n"]
    out.results = {
        "alpha_hat": report.alpha_hat,
        "violated_dim": report.violated_dim,
        "expected": report.expected,
        "n_filtered": report.n_filtered,
        "c0": c0,
    }
    out.checks["mourre"] = report.status == PASS
    out.curves["mourre_spectrum"] = (["index", "mu"], list(enumerate(report.spectrum)))
    if "2n" in done:
        fine = done["2n"]
        out.results.update(alpha_hat_2n=fine.alpha_hat, violated_dim_2n=fine.violated_dim)
        out.checks["refinement_violated_dim"] = fine.violated_dim <= report.violated_dim
        out.checks["refinement_alpha"] = abs(fine.alpha_hat - report.alpha_hat) <= 0.1 * abs(report.alpha_hat)
        out.curves["mourre_spectrum_2n"] = (["index", "mu"], list(enumerate(fine.spectrum)))
    return out


def _lap(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    grid = ctx.config.grid.half_line()
    energy = p["energy"]

    steps = [
        Step("assemble", lambda _: assemble_L(grid, model)),
        Step(
            "scan",
            lambda d: embedded_eigen_scan(d["assemble"], SpectralWindow(energy - 0.1, energy + 0.1)),
            ("assemble",),
        ),
        Step(
            "main",
            lambda d: lap_resolvent_sup(d["assemble"], energy, p["s"], p["etas"], p["probes"], ctx.rng(0)),
            ("assemble",),
        ),
    ]
    if p["control_s"] is not None:
        steps.append(
            Step(
                "control",
                lambda d: lap_resolvent_sup(
                    d["assemble"], energy, p["control_s"], p["etas"], p["probes"], ctx.rng(1)
                ),
                ("assemble",),
            )
        )
    done = run_steps(steps, ctx.threads)

    out = PipelineResult()
    main = done["main"]
    localized = [e.energy for e in done["scan"] if e.localized]
    out.results = {
        "bound_hat": main.bound_hat,
        "floor": main.floor,
        "localized_near_energy": len(localized),
    }
    if localized:
        logger.warning("lap: localized eigenvalues %s within 0.1 of λ = %g", localized, energy)
    out.checks["no_localized_near_energy"] = not localized
    out.checks["plateau"] = main.status == PASS
    out.curves["lap"] = (["eta", "bound"], main.curve)
    if "control" in done:
        control = done["control"]
        growth = control.curve[-1][1] / control.curve[0][1]
        out.results["control_growth"] = growth
        out.checks["control_grows"] = growth >= 1.5
        out.curves["lap_control"] = (["eta", "bound"], control.curve)
    return out


def eigenvector_control(L: DiscreteOperator, window: SpectralWindow) -> WaveField:
    """The eigenvector of L closest to the window center, as a normalized field.

    The search interval around the center doubles until it holds an
    eigenvalue or covers the window.

    Raises:
        GridTooSmall: L has no eigenvalue in the window
    """
    half_width = 0.01 * window.width
    while True:
        energies, vectors = window_eigenpairs(L, window.center - half_width, window.center + half_width)
        if energies.size or half_width >= window.width:
            break
        half_width *= 2.0
    if not energies.size:
        raise GridTooSmall(f"{L.name} has no eigenvalue in [{window.lo}, {window.hi}]")
    i = int(np.argmin(np.abs(energies - window.center)))
    return WaveField.from_vector(L.grid, L.modes, vectors[:, i]).normalized()


def _smoothness(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    half, full = ctx.config.grid.half_line(), ctx.config.grid.full_line()
    cs = model.cross_section
    dt = ctx.config.grid.dt

    def packet(_):
        u = reference_packet(model, full, p["r0"], p["rho0"], p["width"], p["mode"], 1)
        return Identifier(half, full).apply(u).normalized()

    def weights(_):
        return [assemble_weight(half, cs, model.cutoff, model.k, kind, p["s"]) for kind in p["weights"]]

    def control(d):
        v = eigenvector_control(d["assemble"], model.window)
        return kato_smoothness_integrals(d["assemble"], d["weights"][:1], v, p["T_max"] / 8.0, dt, samples=64)[0]

    steps = [
        Step("assemble", lambda _: assemble_L(half, model)),
        Step("packet", packet),
        Step("weights", weights),
        Step(
            "integrals",
            lambda d: kato_smoothness_integrals(d["assemble"], d["weights"], d["packet"], p["T_max"], dt),
            ("assemble", "weights", "packet"),
        ),
    ]
    if p["control"]:
        steps.append(Step("control", control, ("assemble", "weights")))
    if p["snapshots"] > 0:
        steps.append(
            Step(
                "trajectory",
                lambda d: evolve_trajectory(d["assemble"], d["packet"], p["T_max"], p["snapshots"], dt),
                ("assemble", "packet"),
            )
        )
    done = run_steps(steps, ctx.threads)

    out = PipelineResult()
    for kind, report in zip(p["weights"], done["integrals"]):
        out.results[kind] = {
            "plateau_ratio": report.plateau_ratio,
            "bound_hat": report.bound_hat,
            "status": report.status,
        }
        out.checks[f"kato_{kind}"] = report.status == PASS
        out.curves[f"kato_{kind}"] = (["T", "integral"], report.integral_curve)
    if "control" in done:
        report = done["control"]
        out.results["eigenvector_control"] = {"plateau_ratio": report.plateau_ratio, "status": report.status}
        out.checks["eigenvector_control_fails"] = report.status == FAIL
        out.curves["kato_eigenvector_control"] = (["T", "integral"], report.integral_curve)
    out.fields["packet"] = done["packet"]
    if "trajectory" in done:
        out.trajectories["trajectory"] = done["trajectory"]
    return out


def _radiation(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    grid = ctx.config.grid.half_line()
    cs, cut = model.cross_section, model.cutoff
    L = assemble_L(grid, model)
    M = assemble_M(grid, cut, cs.modes)
    G0, G1, G2 = (assemble_weight(grid, cs, cut, model.k, kind, p["s"]) for kind in ("G0", "G1", "G2"))
    report = radiation_inequality_check(
        L,
        M,
        G0,
        G1,
        G2,
        _c0(model, p["c0"]),
        p["epsilon"],
        p["probes"],
        ctx.rng(0),
        p["C_max"],
        p["guard_cells"],
    )
    out = PipelineResult()
    out.results = {"C": report.C, "worst_margin": report.worst_margin, "scale": report.scale}
    out.checks["radiation"] = report.status == PASS
    return out


def _scattering_setup(ctx: RunContext):
    model = ctx.model
    half, full = ctx.config.grid.half_line(), ctx.config.grid.full_line()
    L = assemble_L(half, model)
    L0 = assemble_L0(half, model.k, model.cross_section)
    H0 = assemble_reference(full, model.k, model.cross_section, "H0")
    return half, full, L, L0, H0, Identifier(half, full)


def _cook(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    dt = ctx.config.grid.dt
    direction = 1 if p["direction"] > 0 else -1
    half, full, L, L0, H0, J = _scattering_setup(ctx)
    u = reference_packet(model, full, p["r0"], p["rho0"], p["width"], p["mode"], direction)
    u_wrong = reference_packet(model, full, p["r0"], p["rho0"], p["width"], p["mode"], -direction)

    steps = [
        Step("forward", lambda _: cook_wave_operator(L, H0, J, u, direction, p["T_max"], dt, p["tol"])),
        Step("wrong_sign", lambda _: cook_wave_operator(L, H0, J, u_wrong, direction, p["T_max"], dt, p["tol"])),
    ]
    if p["chain_rule"]:
        steps.append(
            Step("chain", lambda _: chain_rule_check(L, L0, H0, J, u, direction, p["T_max"], dt, p["tol"]))
        )
    done = run_steps(steps, ctx.threads)

    out = PipelineResult()
    forward, wrong = done["forward"], done["wrong_sign"]
    out.cook["forward"] = (forward, u)
    out.cook["wrong_sign"] = (wrong, u_wrong)
    out.fields["u"] = u
    iso = abs(forward.w.norm() - u.norm())
    out.results = {
        "isometry_defect": iso,
        "wrong_sign_norm": wrong.w.norm() / u_wrong.norm(),
        "exponent": forward.exponent,
        "T_used": forward.T_used,
    }
    out.checks["converged"] = forward.converged
    out.checks["integrand_decay"] = forward.exponent < -1.1
    out.checks["isometry"] = iso < p["isometry_tol"]
    out.checks["wrong_sign"] = out.results["wrong_sign_norm"] < p["wrong_sign_tol"]
    if "chain" in done:
        out.results["chain_rule_defect"] = done["chain"]
        out.checks["chain_rule"] = done["chain"] < p["chain_tol"]
    return out


def _modified_cook(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    dt = ctx.config.grid.dt
    direction = 1 if p["direction"] > 0 else -1
    half, full, L, L0, H0, J = _scattering_setup(ctx)
    u = reference_packet(model, full, p["r0"], p["rho0"], p["width"], p["mode"], direction)
    u_wrong = reference_packet(model, full, p["r0"], p["rho0"], p["width"], p["mode"], -direction)

    steps = [
        Step("family", lambda _: build_identifier_family(model, full, direction)),
        Step(
            "modified",
            lambda d: modified_wave_operator(
                L, H0, J, d["family"], u, direction, p["T_max"], dt, p["tol"], ctx.threads
            ),
            ("family",),
        ),
        Step(
            "wrong_sign",
            lambda d: modified_wave_operator(L, H0, J, d["family"], u_wrong, direction, p["T_max"], dt, p["tol"]),
            ("family",),
        ),
    ]
    if p["contrast"]:
        steps.append(
            Step("unmodified", lambda _: cook_wave_operator(L, H0, J, u, direction, p["T_max"], dt, p["tol"]))
        )
    done = run_steps(steps, ctx.threads)

    out = PipelineResult()
    modified, wrong = done["modified"], done["wrong_sign"]
    out.cook["modified"] = (modified, u)
    out.cook["wrong_sign"] = (wrong, u_wrong)
    iso = abs(modified.w.norm() - u.norm())
    out.results = {
        "isometry_defect": iso,
        "wrong_sign_norm": wrong.w.norm() / u_wrong.norm(),
        "exponent": modified.exponent,
        "T_used": modified.T_used,
    }
    out.checks["modified_converged"] = modified.converged
    out.checks["isometry"] = iso < p["isometry_tol"]
    out.checks["wrong_sign"] = out.results["wrong_sign_norm"] < p["wrong_sign_tol"]
    if "unmodified" in done:
        plain = done["unmodified"]
        out.cook["unmodified"] = (plain, u)
        out.results["unmodified_exponent"] = plain.exponent
        out.checks["unmodified_not_converged"] = not plain.converged
    return out


def _completeness(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    direction = 1 if p["direction"] > 0 else -1
    half, full, L, _, H0, _ = _scattering_setup(ctx)
    identifier = Identifier(half, full, radius=p["r_loc"])
    modified = modifier_decay(model) < 1.0
    if modified:
        identifier = ModifiedIdentifier(identifier, build_identifier_family(model, full, direction))
    report = completeness_probe(
        L,
        H0,
        identifier,
        model.window,
        p["ensemble_size"],
        ctx.rng(0),
        direction,
        p["T_max"],
        ctx.config.grid.dt,
        p["tol"],
        p["r_seed"],
        ctx.threads,
    )
    out = PipelineResult()
    out.results = {
        "mean": report.mean,
        "ratios": report.ratios,
        "statuses": report.statuses,
        "T_used": report.T_used,
        "r_loc": p["r_loc"],
        "modified": modified,
    }
    out.checks["completeness"] = report.mean >= p["threshold"]
    out.checks["members_converged"] = report.converged
    rows = [(i, ratio, T) for i, (ratio, T) in enumerate(zip(report.ratios, report.T_used))]
    out.curves["completeness"] = (["member", "ratio", "T_used"], rows)
    return out


def _phase(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    a1L = model.coeffs.a1L
    nu = modifier_decay(model)
    window = tuple(p["rho_window"])
    phase = build_phase(model.k, a1L, window, model.cutoff.R, nu, p["lam"], p["table_r_max"])
    report = remainder_report(phase, p["rho"], p["r_lo"], p["r_hi"], p["n_fit"])

    out = PipelineResult()
    out.results = {
        "n_iters": phase.n_iters,
        "nu": nu,
        "slope_hat": report.slope_hat,
        "epsilon_expected": report.epsilon_expected,
        "fit_residual": report.fit_residual,
    }
    out.checks["remainder_slope"] = abs(report.slope_hat - report.expected_slope) <= 0.05
    if phase.n_iters == 1 and not a1L.active:
        r = np.geomspace(report.r_lo, report.r_hi, 50)
        closed = (p["lam"] * model.k.k(r)) ** 2 / (4.0 * p["rho"] ** 2)
        error = float(np.max(np.abs(remainder(phase)(r, p["rho"]) - closed) / closed))
        out.results["closed_form_error"] = error
        out.checks["closed_form"] = error <= 1e-10

    r = np.geomspace(model.cutoff.R, p["table_r_max"], p["export_r"])
    rho = np.linspace(window[0], window[1], p["export_rho"])
    out.curves["phase_table"] = (["r", "rho", "phi", "dr_phi", "remainder"], phase_table(phase, r, rho))
    return out


def _compose(ctx: RunContext) -> PipelineResult:
    p, model = ctx.params, ctx.model
    full = ctx.config.grid.full_line()
    a1L = model.coeffs.a1L
    nu = modifier_decay(model)
    b = PolynomialSymbol.channel_hamiltonian(model.k, a1L, p["lam"])

    def errors(R: float):
        cut = CutoffSpec(R)
        support = momentum_support(cut, model.window)
        phase = build_phase(model.k, a1L, support, R, nu, p["lam"], full.r_max) if nu < 1.0 else None
        op = OscillatingOp(phase, channel_symbol(cut, model.window, 1, full.drho), name=f"J[R={R:g}]")
        u = make_packet(1.5 * R, p["rho0"], R / 6.0, full)
        exact = apply_pdo(b, apply_osc(op, u))
        scale = exact.norm()
        err = [
            (exact - apply_osc(OscillatingOp(phase, compose_left(b, op, n)), u)).norm() / scale for n in (1, 2)
        ]
        grid_r = np.linspace(R, 3.0 * R, 32)
        grid_rho = np.linspace(support[0], support[1], 16)
        return err[0], err[1], symbol_rows(compose_left(b, op, 2), grid_r, grid_rho)

    radii = [float(R) for R in p["radii"]]
    done = run_steps([Step(f"R={R:g}", lambda _, R=R: errors(R)) for R in radii], ctx.threads)

    out = PipelineResult()
    rows = []
    for R in radii:
        e1, e2, symbol = done[f"R={R:g}"]
        rows.append((R, e1, e2, e2 / e1))
        out.curves[f"symbol_R{R:g}"] = (["r", "rho", "re", "im"], symbol)
    out.results = {"radii": radii, "error_1": [r[1] for r in rows], "error_2": [r[2] for r in rows]}
    out.curves["compose"] = (["R", "error_1", "error_2", "ratio"], rows)
    out.checks["two_beats_one"] = all(e2 < e1 for _, e1, e2, _ in rows)
    out.checks["errors_decrease"] = all(
        b1 < a1 and b2 < a2 for (_, a1, a2, _), (_, b1, b2, _) in zip(rows, rows[1:])
    )
    out.checks["order_gap"] = all(a[3] / b[3] >= p["improvement"] for a, b in zip(rows, rows[1:]))
    return out


PIPELINE_FUNCS: dict[str, Callable[[RunContext], PipelineResult]] = {
    "validate": _validate,
    "mourre": _mourre,
    "lap": _lap,
    "smoothness": _smoothness,
    "radiation": _radiation,
    "cook": _cook,
    "modified-cook": _modified_cook,
    "completeness": _completeness,
    "phase": _phase,
    "compose": _compose,
}


# === Runs ===


@dataclass(frozen=True)
class RunOutcome:
    exit_code: int
    directory: Path | None
    summary: dict[str, Any]
    error: ScatterError | None = None


def _write_artifacts(directory: Path, result: PipelineResult) -> dict[str, Any]:
    cook = {}
    for name, (header, rows) in result.curves.items():
        write_curve(directory / "curves" / f"{name}.csv", header, rows)
    for name, (cook_result, u) in result.cook.items():
        cook[name] = write_cook_result(directory, name, cook_result, u)
    if result.fields:
        (directory / "fields").mkdir(parents=True, exist_ok=True)
    for name, u in result.fields.items():
        write_field(directory / "fields" / f"{name}.bin", u)
    for name, snapshots in result.trajectories.items():
        write_trajectory(directory, name, snapshots)
    return cook


def run_config(
    config: ScenarioConfig, out: Path | str = "runs", threads: int = 1, seed: int | None = None
) -> RunOutcome:
    """Run a parsed scenario; module errors are captured into the summary."""
    config = config.with_seed(seed)
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    directory = Path(out) / f"{config.name}-{config.pipeline}-{stamp}"
    directory.mkdir(parents=True, exist_ok=False)

    summary: dict[str, Any] = {
        "name": config.name,
        "pipeline": config.pipeline,
        "version": __version__,
        "seed": config.seed,
        "config": config.resolved(),
    }
    started = time.perf_counter()
    logger.info("run %s (%s) → %s", config.name, config.pipeline, directory)
    try:
        try:
            result = PIPELINE_FUNCS[config.pipeline](RunContext(config, threads))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise PipelineFailed(f"{config.pipeline}: {type(exc).__name__}: {exc}") from exc
    except ScatterError as exc:
        logger.error("run %s failed: %s: %s", config.name, exc.code, exc)
        summary.update(status="ERROR", checks={}, results={}, error={"code": exc.code, "message": str(exc)})
        summary["elapsed_seconds"] = time.perf_counter() - started
        write_summary(directory / "summary.json", summary)
        return RunOutcome(EXIT_ERROR, directory, summary, exc)

    cook = _write_artifacts(directory, result)
    passed = all(result.checks.values())
    summary.update(
        status="PASS" if passed else "FAIL",
        checks=result.checks,
        results={**result.results, **({"cook": cook} if cook else {})},
        elapsed_seconds=time.perf_counter() - started,
    )
    write_summary(directory / "summary.json", summary)
    logger.info("run %s: %s", config.name, summary["status"])
    return RunOutcome(EXIT_PASS if passed else EXIT_FAIL, directory, summary)


def run_scenario(
    config_path: Path | str, out: Path | str = "runs", threads: int = 1, seed: int | None = None
) -> RunOutcome:
    """Load, run and persist a scenario.

    Returns:
        RunOutcome with exit code 0 (all checks PASS), 2 (any FAIL) or 1 (error)

    Examples:
        >>> outcome = run_scenario("scenarios/validate-power-1.json", out="runs")
        >>> outcome.exit_code
        0
    """
    try:
        config = load_config(config_path)
    except ScatterError as exc:
        return RunOutcome(EXIT_ERROR, None, {"status": "ERROR", "error": {"code": exc.code, "message": str(exc)}}, exc)
    return run_config(config, out, threads, seed)


# === Comparison ===


@dataclass(frozen=True)
class DiffEntry:
    key: str
    a: Any
    b: Any
    relative: float


@dataclass(frozen=True)
class DiffReport:
    entries: list[DiffEntry]

    @property
    def empty(self) -> bool:
        return not self.entries


def _flatten(value: Any, prefix: str = "") -> dict[str, Any]:
    if isinstance(value, dict):
        flat = {}
        for key, item in value.items():
            flat.update(_flatten(item, f"{prefix}.{key}" if prefix else str(key)))
        return flat
    if isinstance(value, list):
        flat = {}
        for i, item in enumerate(value):
            flat.update(_flatten(item, f"{prefix}[{i}]"))
        return flat
    return {prefix: value}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def compare_runs(
    dir_a: Path | str, dir_b: Path | str, tolerances: dict[str, float] | None = None
) -> DiffReport:
    """Diff the results of two runs key by key.

    Tolerances are relative and looked up by the last key component.

    Raises:
        SchemaDrift: different pipelines or result keys
    """
    a, b = read_summary(dir_a), read_summary(dir_b)
    if a.get("pipeline") != b.get("pipeline"):
        raise SchemaDrift(f"pipelines differ: {a.get('pipeline')} vs {b.get('pipeline')}")
    flat_a, flat_b = _flatten(a.get("results", {})), _flatten(b.get("results", {}))
    if set(flat_a) != set(flat_b):
        raise SchemaDrift(f"result keys differ: {sorted(set(flat_a) ^ set(flat_b))}")

    tolerances = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    entries = []
    for key in sorted(flat_a):
        va, vb = flat_a[key], flat_b[key]
        if _is_number(va) and _is_number(vb):
            denom = max(abs(va), abs(vb))
            relative = 0.0 if denom == 0 else abs(va - vb) / denom
            if relative > tolerances.get(key.split(".")[-1], 0.0):
                entries.append(DiffEntry(key, va, vb, relative))
        elif va != vb:
            entries.append(DiffEntry(key, va, vb, math.inf))
    return DiffReport(entries)
