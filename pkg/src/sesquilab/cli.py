"""Experiment runner: JSON config in, deterministic CSV/JSON artifacts out.

Usage:
    sesqui <mode> --config cfg.json [--out DIR] [--seed U64]

Modes: solve, residual, conserve, stress, monotone, morrey, sweep. Every mode
is a thin wrapper over the library; no numeric logic lives here. Outputs are
named deterministically (summary.json always; per-mode CSV/JSON alongside).
Identical config + seed reproduce byte-identical CSV bodies; wall-clock
metadata goes to run_meta.json only. The environment variable SESQUI_THREADS
caps sweep-row concurrency (default 1, fully sequential).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .energy import critical_latitude_angle, domain_metadata, el_residual, energies
from .errors import ConfigError, IoError, SesquiError
from .families import (
    constant_map,
    great_circle,
    latitude_circle,
    latitude_circle_arclength,
    perturb_tangent,
    random_sphere_field,
)
from .fields import ScalarField
from .grid import Coupling, EuclideanPatch, TorusGrid
from .io import load_field, save_field, write_csv, write_json
from .morrey import BallRegion, MorreyParams, morrey_norm_detailed, smallness
from .noether import conservation_report, so_basis
from .ops import integrate, tension
from .solver import SolveOptions, solve
from .stress import (
    RadialCutoff,
    monotonicity_report,
    stationary_pairing,
    stress_divergence,
    stress_tensor,
    tau_orthogonality,
)

MODES = ("solve", "residual", "conserve", "stress", "monotone", "morrey", "sweep")


def _get(cfg, key, default=None, required=False):
    cur = cfg
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise ConfigError(key, "missing required key")
            return default
        cur = cur[part]
    return cur


def _build_domain(cfg):
    spec = _get(cfg, "domain", required=True)
    kind = spec.get("kind")
    try:
        if kind == "torus":
            return TorusGrid(sizes=tuple(spec["sizes"]), lengths=tuple(spec["lengths"]))
        if kind == "patch":
            return EuclideanPatch(
                m=spec["m"],
                half_width=spec["half_width"],
                nodes_per_axis=spec["nodes"],
                margin=spec.get("margin", 4),
            )
    except KeyError as exc:
        raise ConfigError(f"domain.{exc.args[0]}", "missing required key") from exc
    except ValueError as exc:
        raise ConfigError("domain", str(exc)) from exc
    raise ConfigError("domain.kind", f"must be 'torus' or 'patch', got {kind!r}")


def _build_coupling(cfg, key="coupling"):
    spec = _get(cfg, key, required=True)
    if "delta1" not in spec:
        raise ConfigError(f"{key}.delta1", "missing required key")
    if "delta2" not in spec:
        raise ConfigError(f"{key}.delta2", "missing required key")
    try:
        return Coupling(delta1=float(spec["delta1"]), delta2=float(spec["delta2"]))
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


def _build_initial(cfg, domain, coupling, rng):
    spec = _get(cfg, "initial", required=True)
    if "file" in spec:
        phi = load_field(spec["file"])
    else:
        family = spec.get("family")
        if family == "constant":
            phi = constant_map(domain, spec.get("pole", [0.0] * domain_target_dim(cfg, spec)))
        elif family == "great_circle":
            phi = great_circle(domain)
        elif family == "latitude_circle":
            phi = latitude_circle(domain, _need(spec, "initial.alpha", "alpha"))
        elif family == "latitude_circle_arclength":
            phi = latitude_circle_arclength(domain, _need(spec, "initial.alpha", "alpha"))
        elif family == "latitude_critical":
            alpha0 = spec.get("alpha")
            if alpha0 is None:
                if coupling is None or coupling.delta2 == 0:
                    raise ConfigError("initial.alpha", "needed when coupling fixes no latitude")
                q = coupling.delta1 / coupling.delta2
                if abs(q) >= 1.0:
                    raise ConfigError("coupling", f"|delta1/delta2| = {abs(q)} >= 1 pins no latitude")
                alpha0 = float(np.arcsin(np.sqrt((1.0 + q) / 2.0)))
            phi = latitude_circle(
                domain, critical_latitude_angle(domain, coupling, alpha0, spec.get("bracket", 0.1))
            )
        elif family == "random":
            phi = random_sphere_field(domain, spec.get("n", 2), rng)
        else:
            raise ConfigError("initial.family", f"unknown family {family!r}")
    amplitude = float(spec.get("perturb", 0.0))
    if amplitude:
        phi = perturb_tangent(phi, amplitude, rng)
    return phi


def domain_target_dim(cfg, spec):
    pole = spec.get("pole")
    if pole is not None:
        return len(pole)
    return _get(cfg, "domain.n", default=2) + 1


def _need(spec, key, name):
    if name not in spec:
        raise ConfigError(key, "missing required key")
    return spec[name]


def _solver_options(cfg):
    spec = _get(cfg, "solver", default={})
    try:
        return SolveOptions(
            max_iters=int(spec.get("max_iters", 10000)),
            residual_tol=float(spec.get("residual_tol", 1e-6)),
            initial_step=spec.get("initial_step"),
            armijo_c=float(spec.get("armijo_c", 1e-4)),
            backtrack_factor=float(spec.get("backtrack_factor", 0.5)),
            record_every=int(spec.get("record_every", 1)),
            harmonic_mode=bool(spec.get("harmonic_mode", False)),
        )
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from exc


def _sup_tension(phi):
    tau = tension(phi).values
    if isinstance(phi.domain, EuclideanPatch):
        tau = tau[phi.domain.interior_slices()]
    return float(np.max(np.abs(tau)))


# ---------------------------------------------------------------------------
# modes


def _mode_solve(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    coupling = _build_coupling(cfg)
    phi0 = _build_initial(cfg, domain, coupling, rng)
    report = solve(phi0, coupling, _solver_options(cfg))
    rows = list(
        zip(
            report.recorded_iterations,
            report.energy_history,
            report.residual_history,
            report.stepsize_history,
        )
    )
    write_csv(out / "energy_history.csv", ["iter", "energy", "residual", "stepsize"], rows)
    save_field(out / "final_field.sqf", report.final_field)
    summary["coupling"] = {"delta1": coupling.delta1, "delta2": coupling.delta2}
    summary["grid"] = domain_metadata(domain)
    summary["solve"] = report.to_json_dict()
    summary["final_energies"] = energies(report.final_field, coupling).to_json_dict()
    summary["sup_tension"] = _sup_tension(report.final_field)


def _mode_residual(cfg, out, rng, summary):
    coupling = _build_coupling(cfg)
    refine = _get(cfg, "refine")
    rows = []
    if refine:
        base = _get(cfg, "domain", required=True)
        if base.get("kind") != "torus" or len(base.get("sizes", [])) != 1:
            raise ConfigError("refine", "refinement sweeps need a 1-D torus domain")
        for n in refine:
            domain = TorusGrid(sizes=(int(n),), lengths=tuple(base["lengths"]))
            phi = _build_initial(cfg, domain, coupling, rng)
            rows.append((int(n), float(np.max(np.abs(el_residual(phi, coupling).values)))))
    else:
        domain = _build_domain(cfg)
        phi = _build_initial(cfg, domain, coupling, rng)
        rows.append((domain.sizes[0], float(np.max(np.abs(el_residual(phi, coupling).values)))))
    write_csv(out / "residual.csv", ["N", "sup_residual"], rows)
    summary["coupling"] = {"delta1": coupling.delta1, "delta2": coupling.delta2}
    summary["grid"] = _get(cfg, "domain", required=True)
    summary["sup_residual"] = rows[-1][1]
    if len(rows) >= 2:
        ns = np.log2([r[0] for r in rows])
        vals = np.log2([r[1] for r in rows])
        summary["refinement_slope"] = float(-np.polyfit(ns, vals, 1)[0])


def _mode_conserve(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    coupling = _build_coupling(cfg)
    phi = _build_initial(cfg, domain, coupling, rng)
    rows = conservation_report(phi, coupling)
    write_csv(
        out / "conservation.csv",
        ["generator", "sup_div", "l2_div", "max_weak_pairing"],
        [(str(r["generator"]), r["sup_div"], r["l2_div"], r["max_weak_pairing"]) for r in rows],
    )
    summary["coupling"] = {"delta1": coupling.delta1, "delta2": coupling.delta2}
    summary["grid"] = domain_metadata(domain)
    summary["max_sup_div"] = max(r["sup_div"] for r in rows)
    summary["max_weak_pairing"] = max(r["max_weak_pairing"] for r in rows)


def _mode_stress(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    coupling = _build_coupling(cfg)
    phi = _build_initial(cfg, domain, coupling, rng)
    fields, sup = stress_divergence(phi, coupling)
    rows = []
    for axis, f in enumerate(fields):
        rows.append(
            (
                str(axis),
                float(np.max(np.abs(f.values))),
                float(np.sqrt(integrate(ScalarField(domain, f.values**2)))),
            )
        )
    write_csv(out / "stress.csv", ["axis", "sup_div", "l2_div"], rows)
    summary["coupling"] = {"delta1": coupling.delta1, "delta2": coupling.delta2}
    summary["grid"] = domain_metadata(domain)
    summary["sup_div_interior"] = sup
    S = stress_tensor(phi, coupling)
    summary["trace_integral"] = float(integrate(ScalarField(domain, S.trace())))
    cutoff_radius = _get(cfg, "cutoff_radius")
    if cutoff_radius is not None:
        summary["stationary_pairing"] = stationary_pairing(
            phi, coupling, RadialCutoff(float(cutoff_radius))
        )


def _mode_monotone(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    coupling = _build_coupling(cfg)
    phi = _build_initial(cfg, domain, coupling, rng)
    radii = _get(cfg, "radii", required=True)
    report = monotonicity_report(phi, coupling, radii)
    write_csv(
        out / "monotonicity.csv",
        ["r", "theta", "tau_orth"],
        [(row.r, row.theta, row.tau_orth) for row in report.rows],
    )
    summary["coupling"] = {"delta1": coupling.delta1, "delta2": coupling.delta2}
    summary["grid"] = domain_metadata(domain)
    summary["verdict"] = report.verdict.value
    summary["tau_orth"] = report.rows[0].tau_orth
    summary["eps_ball"] = list(report.eps_ball)


def _mode_morrey(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    spec = _get(cfg, "morrey", required=True)
    coupling = _build_coupling(cfg) if _get(cfg, "coupling") else None
    phi = _build_initial(cfg, domain, coupling, rng)
    summary["grid"] = domain_metadata(domain)
    if "p" in spec:
        from .morrey import gradient_norm_field

        params = MorreyParams(p=float(spec["p"]), lam=float(_need(spec, "morrey.lambda", "lambda")))
        region = BallRegion(
            center=tuple(spec.get("center", (0.0,) * domain.m)),
            radius=float(spec.get("region_radius", 1.0)),
        )
        result = morrey_norm_detailed(gradient_norm_field(phi), params, region)
        write_json(out / "morrey.json", result.to_json_dict())
        summary["morrey_norm"] = result.norm
    if spec.get("eps0") is not None:
        report = smallness(phi, float(spec["eps0"]))
        summary["smallness"] = report.to_json_dict()


def _sweep_couplings(cfg):
    spec = _get(cfg, "sweep", required=True)
    if "couplings" in spec:
        pairs = [(float(a), float(b)) for a, b in spec["couplings"]]
    elif "ratios" in spec:
        d2 = float(spec.get("delta2", 1.0))
        pairs = [(float(q) * d2, d2) for q in spec["ratios"]]
    else:
        raise ConfigError("sweep", "needs 'couplings' or 'ratios'")
    return pairs


def _mode_sweep(cfg, out, rng, summary):
    domain = _build_domain(cfg)
    pairs = _sweep_couplings(cfg)
    opts = _solver_options(cfg)
    seed = _get(cfg, "seed", default=0)

    def run_row(index_pair):
        idx, (d1, d2) = index_pair
        coupling = Coupling(delta1=d1, delta2=d2)
        row_rng = np.random.default_rng([int(seed), idx])
        phi0 = _build_initial(cfg, domain, coupling, row_rng)
        report = solve(phi0, coupling, opts)
        b = energies(report.final_field, coupling)
        defect = max(
            r["sup_div"] for r in conservation_report(report.final_field, coupling, so_basis(report.final_field.n))
        )
        return (
            d1,
            d2,
            str(report.converged).lower(),
            b.dirichlet,
            b.bienergy,
            _sup_tension(report.final_field),
            defect,
        )

    workers = int(os.environ.get("SESQUI_THREADS", "1"))
    items = list(enumerate(pairs))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_row, items))
    else:
        rows = [run_row(item) for item in items]
    write_csv(
        out / "sweep.csv",
        ["delta1", "delta2", "converged", "dirichlet", "bienergy", "sup_tau", "conservation_defect"],
        [(r[0], r[1], r[2], r[3], r[4], r[5], r[6]) for r in rows],
    )
    summary["grid"] = domain_metadata(domain)
    summary["rows"] = len(rows)


_RUNNERS = {
    "solve": _mode_solve,
    "residual": _mode_residual,
    "conserve": _mode_conserve,
    "stress": _mode_stress,
    "monotone": _mode_monotone,
    "morrey": _mode_morrey,
    "sweep": _mode_sweep,
}


def run(config: dict, out_dir) -> dict:
    """Execute one experiment; returns the summary dict (also written to disk)."""
    mode = config.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {mode!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    seed = int(config.get("seed", 0))
    rng = np.random.default_rng(seed)
    summary = {"version": __version__, "mode": mode, "seed": seed}
    _RUNNERS[mode](config, out, rng, summary)
    write_json(out / "summary.json", summary)
    write_json(out / "run_meta.json", {"wall_time_unix": time.time()})
    return summary


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sesqui", description=__doc__)
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory (overrides config key 'out')")
    parser.add_argument("--seed", type=int, default=None, help="rng seed (overrides config key 'seed')")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        cfg["mode"] = args.mode  # flags > file
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = args.out if args.out is not None else cfg.get("out", ".")
        run(cfg, out_dir)
    except ConfigError as exc:
        _emit_error("ConfigError", exc, key=exc.key)
        return 2
    except IoError as exc:
        _emit_error("IoError", exc)
        return 4
    except SesquiError as exc:
        _emit_error(type(exc).__name__, exc)
        return 3
    return 0


def _emit_error(kind, exc, key=None):
    payload = {"error": {"type": kind, "message": str(exc)}}
    if key is not None:
        payload["error"]["key"] = key
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
