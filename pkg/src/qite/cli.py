"""Command-line driver: runs the experiments and emits machine-readable CSVs.

Every CSV starts with a `# manifest-sha256: <hash>` comment tying it to the
JSON run manifest written next to it, and all floats are printed with 17
significant digits so files round-trip exactly. Identical configs produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import approx, ground_search, ite, trotter
from .config import (DESK_SHOTS, PAPER_SHOTS, ConfigError, ExperimentConfig,
                     config_from_dict, load_hamiltonian)
from .pauli import diagonalize, eigen_coefficients, overlap_gamma
from .states import basis_state


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _pool_size() -> int:
    env = os.environ.get("QITE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def manifest_for(cfg: ExperimentConfig, results: dict) -> tuple[str, str]:
    """(manifest JSON text, config hash). The hash covers the canonical
    config only, so it is known before the run and stable across reruns."""
    digest = hashlib.sha256(cfg.canonical_json().encode()).hexdigest()
    manifest = {
        "config": json.loads(cfg.canonical_json()),
        "config_sha256": digest,
        "results": results,
    }
    return json.dumps(manifest, sort_keys=True, indent=2), digest


def write_csv(path: str | Path, cfg: ExperimentConfig, columns: list[str],
              rows: list[tuple], results: dict) -> None:
    manifest_text, digest = manifest_for(cfg, results)
    lines = [f"# manifest-sha256: {digest}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    out = Path(path)
    out.write_text("\n".join(lines) + "\n", newline="\n")
    out.with_suffix(out.suffix + ".manifest.json").write_text(
        manifest_text + "\n", newline="\n"
    )


def _initial_state(cfg: ExperimentConfig, h):
    if cfg.gamma_sq is None:
        return basis_state(h.qubit_count, 0)
    return ite.state_with_overlap(diagonalize(h), cfg.gamma_sq)


def run_lambda_sweep(cfg: ExperimentConfig):
    h = load_hamiltonian(cfg.hamiltonian)
    sp = diagonalize(h)
    # this sweep defaults to a gamma^2 = 0.5 engineered initial state
    gamma_sq = 0.5 if cfg.gamma_sq is None else cfg.gamma_sq
    phi = ite.state_with_overlap(sp, gamma_sq)
    gamma = overlap_gamma(sp, phi.amplitudes)
    grid = cfg.lambda_grid or list(np.linspace(0.2, 1.0, 61))

    def point(lam):
        res = ite.prepare_ite(h, phi, cfg.tau, float(lam),
                              eps_target=cfg.eps_target, alpha=cfg.alpha,
                              mode=cfg.mode, degree=cfg.degree)
        if lam >= abs(sp.ground_energy):
            lower, _ = ite.success_prob_bounds(
                approx.make_spec(cfg.tau, float(lam), cfg.alpha), gamma,
                sp.ground_energy, res.eps_used,
            )
            lower = max(lower, 0.0)
        else:
            # the analytic floor holds only for lam >= |lambda_0|; below it
            # the only honest lower bound is the trivial one
            lower = 0.0
        infid = 1.0 - res.fidelity_to_exact**2
        return (float(lam), infid, res.success_prob, lower)

    with ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        rows = list(pool.map(point, grid))
    checks = {
        "success_prob_above_lower_bound": all(r[2] >= r[3] for r in rows),
    }
    results = {"checks": checks, "ground_energy": sp.ground_energy}
    return ["lambda", "infidelity", "success_prob", "lower_bound"], rows, results


def run_tau_sweep(cfg: ExperimentConfig):
    h = load_hamiltonian(cfg.hamiltonian)
    sp = diagonalize(h)
    phi = _initial_state(cfg, h)
    gamma = overlap_gamma(sp, phi.amplitudes)
    lam0 = abs(sp.ground_energy)
    grid = cfg.tau_grid or [10.0 + 5.0 * k for k in range(9)]

    def point(tau):
        tau = float(tau)
        lam = lam0 + 1.0 / (2.0 * tau)
        res = ite.prepare_ite(h, phi, tau, lam, eps_target=cfg.eps_target,
                              alpha=cfg.alpha, mode=cfg.mode, degree=cfg.degree)
        c = eigen_coefficients(sp, res.state.amplitudes)
        energy = float(np.sum(np.abs(c) ** 2 * sp.eigenvalues))
        bound = ite.lemma1_lower_bound(cfg.alpha, gamma**2, res.C_used,
                                       res.eps_used)
        return (tau, energy, sp.ground_energy, res.success_prob, bound)

    with ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        rows = list(pool.map(point, grid))
    checks = {
        "success_prob_above_lemma1_bound": all(r[3] >= r[4] for r in rows),
        "energy_error_decreases": all(
            abs(a[1] - sp.ground_energy) >= abs(b[1] - sp.ground_energy)
            for a, b in zip(rows, rows[1:])
        ),
    }
    results = {"checks": checks, "ground_energy": sp.ground_energy}
    columns = ["tau", "energy_expectation", "exact_ground_energy",
               "success_prob", "lemma1_lower_bound"]
    return columns, rows, results


def run_ground_search(cfg: ExperimentConfig):
    h = load_hamiltonian(cfg.hamiltonian)
    sp = diagonalize(h)
    phi = _initial_state(cfg, h)
    res = ground_search.run_adaptive_search(
        h, phi, cfg.tau0, cfg.dt, cfg.B,
        shots_override=None if cfg.exact_loss else cfg.shots,
        seed=cfg.seed, alpha=cfg.alpha, exact_loss=cfg.exact_loss,
    )
    rows = [
        (s.iteration, s.tau, s.lambda_l, s.lambda_r, s.r, s.branch,
         s.energy, s.ci_low, s.ci_high, s.shots, s.cumulative_queries,
         sp.ground_energy)
        for s in res.history
    ]
    checks = {
        "final_ci_contains_ground_energy":
            res.ci_low <= sp.ground_energy <= res.ci_high or cfg.exact_loss,
        "lambda_in_window":
            abs(sp.ground_energy) <= res.lam
            <= abs(sp.ground_energy) + 1.0 / res.tau,
    }
    results = {
        "checks": checks,
        "final": {"tau": res.tau, "lambda": res.lam, "energy": res.energy,
                  "ci_low": res.ci_low, "ci_high": res.ci_high},
        "ground_energy": sp.ground_energy,
    }
    columns = ["i", "tau", "lambda_l", "lambda_r", "r", "branch", "E_i",
               "ci_low", "ci_high", "shots", "cumulative_queries",
               "exact_ground_energy"]
    return columns, rows, results


def run_trotter_diag(cfg: ExperimentConfig):
    h = load_hamiltonian(cfg.hamiltonian)
    exact_u = ite.evolution_unitary(h)
    grid = cfg.steps_grid or [1, 4, 16, 64, 256]
    rows = []
    for n in grid:
        plan_u = trotter.dense_plan(trotter.build_trotter(h, 1.0, n))
        measured = float(np.linalg.norm(plan_u - exact_u, 2))
        bound = trotter.trotter_error_bound(h.term_count, h.max_abs_coeff,
                                            1.0, n)
        rows.append((n, measured, bound))
    checks = {"measured_error_within_bound": all(r[1] <= r[2] for r in rows)}
    return (["n_steps", "measured_error", "error_bound"], rows,
            {"checks": checks})


def run_approx_diag(cfg: ExperimentConfig):
    h = load_hamiltonian(cfg.hamiltonian)
    lam0 = abs(diagonalize(h).ground_energy)
    lam = cfg.lambda_grid[0] if cfg.lambda_grid else lam0 + 1.0 / (2.0 * cfg.tau)
    spec0 = approx.make_spec(cfg.tau, lam, cfg.alpha)
    if cfg.degree is not None:
        poly = approx.fourier_fit(spec0, cfg.degree)
        eps = approx.sup_error(spec0.f_exact, poly, (-1.0, lam))
        degree = cfg.degree
    else:
        poly, fitted = approx.fit_to_tolerance(spec0, cfg.eps_target)
        eps, degree = fitted.eps, fitted.degree
    rows = [(x, fe, fv, err)
            for x, fe, fv, err in approx.fit_report(spec0, poly, 1001)]
    checks = {"eps_within_target": eps <= cfg.eps_target}
    results = {"checks": checks, "degree": degree, "eps": eps, "lambda": lam}
    return ["x", "f_exact", "f_approx", "abs_error"], rows, results


RUNNERS = {
    "lambda_sweep": run_lambda_sweep,
    "tau_sweep": run_tau_sweep,
    "ground_search": run_ground_search,
    "trotter_diag": run_trotter_diag,
    "approx_diag": run_approx_diag,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qite",
        description="Run filtered imaginary-time-evolution experiments; "
                    "results land in CSV files with a JSON manifest.",
    )
    p.add_argument("experiment", nargs="?", choices=sorted(RUNNERS),
                   help="experiment to run (or set it in --config)")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--experiment", dest="experiment_flag",
                   choices=sorted(RUNNERS))
    p.add_argument("--tau", type=float)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--exact-loss", action="store_true", default=None)
    p.add_argument("--mode", choices=("block", "comb"))
    p.add_argument("--paper-shots", action="store_true",
                   help=f"use {PAPER_SHOTS} shots instead of the desk-scale "
                        f"default {DESK_SHOTS}")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    payload: dict = {}
    if args.config:
        payload = json.loads(Path(args.config).read_text())
        if not isinstance(payload, dict):
            raise ConfigError("<file>", "top level must be a JSON object")
    experiment = args.experiment_flag or args.experiment
    if experiment:
        payload["experiment"] = experiment
    if args.tau is not None:
        payload["tau"] = args.tau
        payload.setdefault("tau0", args.tau)
    if args.paper_shots:
        payload["shots"] = PAPER_SHOTS
    if args.shots is not None:
        payload["shots"] = args.shots
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.out is not None:
        payload["output"] = args.out
    if args.exact_loss:
        payload["exact_loss"] = True
    if args.mode is not None:
        payload["mode"] = args.mode
    return config_from_dict(payload)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    columns, rows, results = RUNNERS[cfg.experiment](cfg)
    write_csv(cfg.output, cfg, columns, rows, results)
    checks = results.get("checks", {})
    for name, ok in sorted(checks.items()):
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {cfg.output} ({len(rows)} rows)")
    return 0 if all(checks.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
