"""Scenario runner: witness / gas / radiation / cavity / verify subcommands.

Every run writes its artifacts plus a ``report.json`` of computed-vs-
predicted checks, each carrying the tolerance it was judged against.
Outputs are deterministic functions of (config, seed, tool version):
no timestamps, sorted keys, fixed float formatting.

Exit codes: 0 success (all checks passed), 2 config schema violation,
3 numerical guard breach, 4 I/O failure, 5 checks failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, schemas
from .cavity import CavityConfig, TruncationError, displaced_frame, simulate
from .gas import GasConfig, mc_ensemble, quantum_surrogate, surrogate_ground_state
from .operators import quadrature_p, quadrature_x
from .protocol import (
    CanonicalError,
    ClosureError,
    branch_evolve,
    evolve_full,
    fit_closure,
    solve_observable_ode,
)
from .radiation import (
    build_lattice,
    dipole_transform,
    gaussian_dipole,
    mean_fields,
    mode_couplings,
    per_mode_rk_deviation,
    plane_wave_dipole,
)
from .reporting import check, config_hash, write_csv, write_json
from .states import parse_state
from .witness import (
    build_w_pm,
    build_w_tilde,
    certify,
    eigen_branches,
    witness_expectation,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_GUARD = 3
EXIT_IO = 4
EXIT_FAILED = 5

# Tolerances stamped into report.json next to every emitted number.
TOLERANCES = {
    "gas_mean_drift_max_z": 3.0,
    "gas_std_rel_err": 0.05,
    "cavity_witness_constancy": 1e-9,
    "cavity_displaced_frame_interaction": 1e-8,
    "cavity_truncation_guard": 1e-8,
    "radiation_mean_field_residual": 0.05,
    "radiation_b_over_e": 0.02,
    "radiation_mode_rk_agreement": 1e-8,
    "radiation_divergence": 1e-8,
    "closure_rotation_matrix": 1e-9,
    "canonical_constant": 1e-9,
    "drift_law_vs_exact": 1e-6,
    "branch_oracle_vs_exact": 1e-9,
}


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config: dict
    out_dir: Path
    seed: int
    fmt: str = "csv"
    workers: int = 1


def _witness_matrix(name: str) -> np.ndarray:
    return {"plus": build_w_pm(+1), "minus": build_w_pm(-1),
            "tilde": build_w_tilde()}[name]


def _write_trajectory(out: Path, stem: str, fmt: str, header: list[str],
                      columns: list[np.ndarray]) -> None:
    if fmt == "csv":
        write_csv(out / f"{stem}.csv", header, columns)
    else:
        write_json(out / f"{stem}.json",
                   {name: col for name, col in zip(header, columns)})


def _run_witness(manifest: RunManifest) -> list[dict]:
    rho = parse_state(manifest.config["rhoS"])
    report = certify(rho)
    checks = [
        check("witness_pair_sum", report.w_plus + report.w_minus, 1e-12,
              "abs_diff", predicted=2.0),
        check("sigma_w_nonnegative", -report.sigma_w, 0.0, "le"),
    ]
    write_json(manifest.out_dir / "witness.json", {
        "wTildeExpectation": report.w_tilde_expectation,
        "wPlus": report.w_plus,
        "wMinus": report.w_minus,
        "certified": report.certified,
        "certifyingWitness": report.certifying_witness,
        "sigmaW": report.sigma_w,
    })
    return checks


def _run_gas(manifest: RunManifest) -> list[dict]:
    cfg = manifest.config
    rho = parse_state(cfg["rhoS"])
    w = _witness_matrix(cfg["witness"])
    branches = eigen_branches(w, rho)
    times = np.linspace(0.0, cfg["tMax"], cfg["nSteps"])
    gas_cfg = GasConfig(n_particles=cfg["N"], mass=cfg["m"], beta=cfg["beta"],
                        alpha=cfg["alpha"], branches=branches, times=times)
    result = mc_ensemble(gas_cfg, manifest.seed, cfg["samples"],
                         workers=manifest.workers)
    w0 = branches.expectation
    slope = float(np.polyfit(times, result.mean, 1)[0])
    rel_std = np.abs(result.std - result.analytic_std) / result.analytic_std
    checks = [
        check("gas_mean_drift_max_z", result.max_abs_z,
              TOLERANCES["gas_mean_drift_max_z"], "le"),
        check("gas_fitted_slope", slope, 3.0 * result.analytic_std[-1]
              / np.sqrt(result.sample_count) / max(times[-1], 1e-300),
              "abs_diff", predicted=-cfg["alpha"] * w0),
        check("gas_std_rel_err", float(rel_std.max()),
              TOLERANCES["gas_std_rel_err"], "le"),
    ]
    _write_trajectory(manifest.out_dir, "gas_trajectory", manifest.fmt,
                      ["t", "mean", "std", "analytic_mean", "analytic_std"],
                      [times, result.mean, result.std, result.analytic_mean,
                       result.analytic_std])
    return checks


def _run_cavity(manifest: RunManifest) -> list[dict]:
    cfg = manifest.config
    times = np.linspace(0.0, cfg["tMax"], cfg["nSteps"])
    cav = CavityConfig(
        epsilons=tuple(cfg["epsilons"]), omega=cfg["omega"], gamma=cfg["gamma"],
        n_max=cfg["nMax"], rho_s0=parse_state(cfg["rhoS0"]),
        env_init=cfg["envInit"], env_beta=cfg.get("envBeta"),
        times=times, frozen=cfg.get("frozen", True))
    traj = simulate(cav)
    checks = []
    if cav.frozen:
        drift = float(np.abs(traj.series["W"] - traj.series["W"][0]).max())
        checks.append(check("cavity_witness_constancy", drift,
                            TOLERANCES["cavity_witness_constancy"], "le"))
    if cav.gamma != 0:
        frame = displaced_frame(cav)
        checks.append(check("cavity_displaced_frame_interaction",
                            frame.structure_residual,
                            TOLERANCES["cavity_displaced_frame_interaction"], "le"))
    checks.append(check("cavity_truncation_guard",
                        float(np.abs(traj.series["top_population"]).max()),
                        TOLERANCES["cavity_truncation_guard"], "le"))
    _write_trajectory(manifest.out_dir, "cavity_trajectory", manifest.fmt,
                      ["t", "X", "P", "n", "W"],
                      [times, traj.series["X"], traj.series["P"],
                       traj.series["n"], traj.series["W"]])
    return checks


def _radiation_dipole(cfg: dict, lattice, grid_n: int):
    dip = cfg["dipole"]
    if dip["type"] == "gaussian":
        grid = gaussian_dipole(cfg["L"], grid_n, dip.get("width", cfg["L"] / 8),
                               direction=dip.get("direction", (0.0, 1.0, 0.0)),
                               amplitude=dip.get("amplitude", 1.0))
    elif dip["type"] == "planewave":
        grid = plane_wave_dipole(lattice, grid_n, dip["nTriple"],
                                 polarization_index=dip.get("polIndex", 0),
                                 amplitude=dip.get("amplitude", 1.0))
    else:
        grid = np.load(dip["path"])
    return dipole_transform(grid, lattice, grid_n)


def _run_radiation(manifest: RunManifest) -> list[dict]:
    cfg = manifest.config
    rho = parse_state(cfg["rhoS"])
    w0 = witness_expectation(_witness_matrix(cfg["witness"]), rho)
    lattice = build_lattice(cfg["L"], cfg["kMax"])
    dipole = _radiation_dipole(cfg, lattice, cfg["gridN"])
    fields = mean_fields(dipole, w0, cfg["epsilon0"], cfg["T"], cfg["nSteps"])
    rk_dev = per_mode_rk_deviation(lattice, mode_couplings(dipole, cfg["epsilon0"]),
                                   w0)
    checks = [
        check("radiation_mean_field_residual", fields["pointwise_residual"],
              TOLERANCES["radiation_mean_field_residual"], "le"),
        check("radiation_b_over_e", fields["b_over_e"],
              TOLERANCES["radiation_b_over_e"], "le"),
        check("radiation_mode_rk_agreement", rk_dev,
              TOLERANCES["radiation_mode_rk_agreement"], "le"),
        check("radiation_divergence", fields["divergence_residual"],
              TOLERANCES["radiation_divergence"], "le"),
    ]
    write_json(manifest.out_dir / "radiation_fields.json", {
        "gridN": cfg["gridN"], "L": cfg["L"], "modes": lattice.n_modes,
        "eBar": fields["e_bar"], "bBar": fields["b_bar"],
        "reference": fields["reference"],
    })
    write_csv(manifest.out_dir / "radiation_residuals.csv",
              ["pointwise_residual", "l2_residual", "b_over_e",
               "divergence_residual", "mode_rk_deviation"],
              [np.array([fields["pointwise_residual"]]),
               np.array([fields["l2_residual"]]),
               np.array([fields["b_over_e"]]),
               np.array([fields["divergence_residual"]]),
               np.array([rk_dev])])
    return checks


# Pinned desk-scale configurations reproduced by `wpsim verify`.
VERIFY_PRESETS: dict[str, dict] = {
    "gas": {"N": 1000, "m": 1.0, "beta": 1.0, "alpha": 0.1, "rhoS": "phi+",
            "witness": "minus", "tMax": 10.0, "nSteps": 21, "samples": 10000},
    "cavity": {"epsilons": [0.5, 0.1, 0.2, 0.5], "omega": 1.0, "gamma": 0.2,
               "nMax": 40, "rhoS0": "phi+", "envInit": "vacuum",
               "tMax": 50.0, "nSteps": 1000},
    "radiation": {"L": 6.283185307179586, "kMax": 8.0, "gridN": 24,
                  "epsilon0": 1.0,
                  "dipole": {"type": "gaussian", "width": 0.7},
                  "rhoS": "phi+", "witness": "minus",
                  "T": 251.32741228718345, "nSteps": 4096},
}


def _protocol_cross_checks() -> list[dict]:
    """Structure fits and oracle agreements at desk scale."""
    checks = []
    # closure on the cavity quadrature pair: ordered (P, X) the constants
    # form the rotation [[0, w], [-w, 0]]
    dim, omega = 30, 1.0
    h_e = omega * np.diag(np.arange(dim)).astype(complex)
    c, _ = fit_closure(h_e, [quadrature_p(dim), quadrature_x(dim)], ["P", "X"])
    target = np.array([[0.0, omega], [-omega, 0.0]])
    checks.append(check("closure_rotation_matrix",
                        float(np.abs(c - target).max()),
                        TOLERANCES["closure_rotation_matrix"], "le"))
    # canonical constant on the gas surrogate equals the coupling
    alpha = 0.25
    model = quantum_surrogate(alpha=alpha, dim=56)
    checks.append(check("canonical_constant", float(model.g[0]),
                        TOLERANCES["canonical_constant"], "abs_diff",
                        predicted=alpha))
    # drift law vs exact propagation on the surrogate
    rho_s = parse_state("phi+")
    rho_e = surrogate_ground_state(56)
    times = np.linspace(0.0, 6.0, 61)
    traj = evolve_full(model, rho_s, rho_e, times)
    w0 = traj.series["W"][0]
    ode = solve_observable_ode(model.c, model.g, w0, np.array([0.0]), times,
                               names=["P"])
    dev = float(np.abs(ode.series["P"] - traj.series["P"]).max())
    checks.append(check("drift_law_vs_exact", dev,
                        TOLERANCES["drift_law_vs_exact"], "le"))
    # branch mixture vs exact composite on the surrogate
    branches = eigen_branches(model.w, rho_s)
    btraj = branch_evolve(model, branches, rho_e, times)
    bdev = float(np.abs(btraj.series["P"] - traj.series["P"]).max())
    checks.append(check("branch_oracle_vs_exact", bdev,
                        TOLERANCES["branch_oracle_vs_exact"], "le"))
    return checks


def run(manifest: RunManifest) -> int:
    """Validate, dispatch, write artifacts and report.json; return exit code."""
    schema = schemas.BY_SUBCOMMAND[manifest.subcommand]
    try:
        jsonschema.validate(manifest.config, schema)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "(root)"
        missing = ""
        if err.validator == "required":
            missing = f" ({err.message})"
        print(f"config invalid at {path}{missing}: {err.message}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        manifest.out_dir.mkdir(parents=True, exist_ok=True)
        if manifest.subcommand == "witness":
            checks = _run_witness(manifest)
        elif manifest.subcommand == "gas":
            checks = _run_gas(manifest)
        elif manifest.subcommand == "cavity":
            checks = _run_cavity(manifest)
        elif manifest.subcommand == "radiation":
            checks = _run_radiation(manifest)
        else:
            return _verify(manifest)
    except (TruncationError, ClosureError, CanonicalError) as err:
        print(f"numerical guard breach: {err}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as err:
        print(f"I/O failure: {err}", file=sys.stderr)
        return EXIT_IO
    report = {
        "toolVersion": __version__,
        "subcommand": manifest.subcommand,
        "seed": manifest.seed,
        "configHash": config_hash(manifest.config),
        "checks": sorted(checks, key=lambda c: c["name"]),
        "allPassed": all(c["passed"] for c in checks),
    }
    write_json(manifest.out_dir / "report.json", report)
    return EXIT_OK if report["allPassed"] else EXIT_FAILED


def _verify(manifest: RunManifest, presets: dict | None = None) -> int:
    """One-shot reproduction of every pinned scenario check."""
    presets = presets or VERIFY_PRESETS
    sections: dict[str, list[dict]] = {}
    for name in ("gas", "cavity", "radiation"):
        sub = RunManifest(subcommand=name, config=presets[name],
                          out_dir=manifest.out_dir / name, seed=manifest.seed,
                          fmt=manifest.fmt, workers=manifest.workers)
        code = run(sub)
        if code in (EXIT_SCHEMA, EXIT_GUARD, EXIT_IO):
            return code
        sections[name] = json.loads(
            (sub.out_dir / "report.json").read_text())["checks"]
    sections["protocol"] = _protocol_cross_checks()
    failures = [c["name"] for sec in sections.values() for c in sec
                if not c["passed"]]
    report = {
        "toolVersion": __version__,
        "subcommand": "verify",
        "seed": manifest.seed,
        "configHash": config_hash(presets),
        "sections": sections,
        "failedCriteria": sorted(failures),
        "allPassed": not failures,
    }
    write_json(manifest.out_dir / "report.json", report)
    return EXIT_OK if not failures else EXIT_FAILED


def verify(out_dir: Path, seed: int = 42, workers: int = 1,
           presets: dict | None = None) -> int:
    """Library entry point for the verify subcommand (testable presets)."""
    manifest = RunManifest(subcommand="verify", config={}, out_dir=Path(out_dir),
                           seed=seed, workers=workers)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    return _verify(manifest, presets=presets)


def _env_int(name: str, default: int) -> int:
    val = os.environ.get(name)
    return int(val) if val else default


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wpsim",
        description="witness-coupled environment signature simulator")
    parser.add_argument("subcommand",
                        choices=["witness", "gas", "radiation", "cavity",
                                 "verify"])
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (not needed for verify)")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (beats WPSIM_SEED; default 42)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker pool size (beats WPSIM_WORKERS; "
                             "default: logical cores)")
    args = parser.parse_args(argv)

    seed = args.seed if args.seed is not None else _env_int("WPSIM_SEED", 42)
    workers = (args.workers if args.workers is not None
               else _env_int("WPSIM_WORKERS", os.cpu_count() or 1))

    if args.subcommand == "verify":
        config = {}
    else:
        if args.config is None:
            print("--config is required for this subcommand", file=sys.stderr)
            return EXIT_SCHEMA
        try:
            config = json.loads(args.config.read_text())
        except OSError as err:
            print(f"cannot read config: {err}", file=sys.stderr)
            return EXIT_IO
        except ValueError as err:
            print(f"config is not valid JSON: {err}", file=sys.stderr)
            return EXIT_SCHEMA

    manifest = RunManifest(subcommand=args.subcommand, config=config,
                           out_dir=args.out, seed=seed, fmt=args.format,
                           workers=workers)
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
