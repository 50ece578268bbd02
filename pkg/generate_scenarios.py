"""Generate the acceptance scenarios for scatterlab.

Each scenario exercises one pipeline:
- validate: closed-form scaling constants for k = r^(−α)
- phase: remainder decay of the modifier phase (one and two iterations)
- mourre: positive commutator on a window around λ₀ = 1
- lap: weighted resolvent plateau with an s = 0.4 control
- radiation: the G₂ form inequality, free and perturbed
- smoothness: Kato integrals of an outgoing packet against an eigenvector control
- cook / modified-cook / completeness: wave operators and their range
- compose: two-term versus one-term symbol composition
"""

import json
from pathlib import Path

POWER_1 = {"kind": "power", "alpha": 1.0}
SHORT_K = {"kind": "power", "alpha": 1.5}
LONG_K = {"kind": "power", "alpha": 0.6}
REPULSIVE_V = {"name": "V", "c": 0.5, "nu": 2.0}
SHORT_V = {"name": "V", "c": 0.5, "nu": 3.0}


def scenario(name: str, pipeline: str, k: dict, grid: tuple[float, int], **extra) -> dict:
    doc = {
        "name": name,
        "pipeline": pipeline,
        "seed": 0,
        "k": k,
        "cutoff_R": 4.0,
        "window": [0.9, 1.1],
        "grid": {"r_max": grid[0], "n": grid[1]},
    }
    doc.update(extra)
    return doc


def generate_validate() -> list[dict]:
    return [
        scenario(f"power-{alpha:g}", "validate", {"kind": "power", "alpha": alpha}, (50.0, 201))
        for alpha in (0.5, 1.0, 2.0)
    ]


def generate_phase() -> list[dict]:
    """ν = 0.6 needs one iteration, ν = 0.4 two."""
    params = {"r_lo": 20.0, "r_hi": 2000.0, "table_r_max": 2000.0}
    return [
        scenario(f"phase-nu{nu:g}", "phase", {"kind": "power", "alpha": nu}, (50.0, 201), cutoff_R=2.0, params=params)
        for nu in (0.6, 0.4)
    ]


def generate_mourre() -> list[dict]:
    return [scenario("free", "mourre", POWER_1, (450.0, 3001), params={"c0": 1.0})]


def generate_lap() -> list[dict]:
    # η = 0.025 must stay above three level spacings, hence the long box
    params = {"energy": 1.0, "s": 1.0, "control_s": 0.4}
    return [
        scenario("free", "lap", POWER_1, (2000.0, 10001), window=[0.5, 2.0], params=params),
        scenario(
            "short", "lap", SHORT_K, (2000.0, 10001), window=[0.5, 2.0], coeffs=[REPULSIVE_V], params=params
        ),
    ]


def generate_radiation() -> list[dict]:
    angular_v = {**REPULSIVE_V, "theta_modes": [[0, 1.0], [1, 0.3]]}
    return [
        scenario("free", "radiation", POWER_1, (40.0, 401), cross_section={"modes": 1}),
        scenario("short", "radiation", SHORT_K, (40.0, 401), cross_section={"modes": 1}, coeffs=[angular_v]),
    ]


def generate_smoothness() -> list[dict]:
    return [
        scenario(
            "outgoing",
            "smoothness",
            POWER_1,
            (2600.0, 13001),
            window=[3.0, 9.0],
            cross_section={"modes": 1},
            params={"mode": 1, "r0": 8.0, "width": 1.2, "rho0": 2.4, "T_max": 300.0, "snapshots": 4},
        )
    ]


def generate_scattering() -> list[dict]:
    short = {"window": [1.5, 3.5], "coeffs": [SHORT_V]}
    return [
        scenario("short", "cook", SHORT_K, (300.0, 3001), params={"T_max": 40.0, "tol": 1e-4}, **short),
        scenario("short", "completeness", SHORT_K, (300.0, 3001), **short),
        scenario(
            "long",
            "modified-cook",
            {**LONG_K, "c": 0.2},
            (1000.0, 5001),
            window=[1.5, 3.5],
            cross_section={"modes": 1},
            params={"r0": 20.0, "width": 2.0, "T_max": 200.0},
        ),
    ]


def generate_compose() -> list[dict]:
    return [scenario("long", "compose", LONG_K, (200.0, 2001), window=[0.5, 2.0], params={"rho0": 1.0})]


def main():
    """Write every scenario to scenarios/."""
    output_dir = Path("scenarios")
    output_dir.mkdir(exist_ok=True)

    generators = [
        generate_validate,
        generate_phase,
        generate_mourre,
        generate_lap,
        generate_radiation,
        generate_smoothness,
        generate_scattering,
        generate_compose,
    ]

    count = 0
    for generator in generators:
        for doc in generator():
            output_path = output_dir / f"{doc['pipeline']}-{doc['name']}.json"
            output_path.write_text(json.dumps(doc, indent=2) + "\n")
            print(f"  → {output_path}")
            count += 1

    print(f"\nGenerated {count} scenarios in {output_dir}/")
    print("\nRun with: scatter run scenarios/*.json")


if __name__ == "__main__":
    main()
