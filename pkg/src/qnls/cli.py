"""Command-line driver: simulate, linspec, dfourier, modulate, verify, batch.

Runs are configured by a single JSON file; flags override config fields.
Outputs land under --out, the QNLS_OUTPUT_ROOT environment variable, or
./qnls_runs.  Exit codes: 0 success, 1 usage/config error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .evolve import SolverConfig, Trajectory, h1_norm, load_trajectory, run, save_trajectory
from .grids import ComplexField, l2_norm, make_grid
from .linearized import build_H, build_root_basis, expected_gram, gram_table, spectrum_check
from .modulation import ModParams, classify_rate, consistency_residuals, track
from .scattering import build_spectrum, edge_check, jost_solve
from .solitons import SL2Params, exact_modulated_w, explicit_blowup, standing_wave
from .verify import run_battery

__all__ = ["main"]

SCENARIOS = ("standing-wave", "explicit-blowup", "modulated-soliton")
PERTURBATION_SHAPES = ("gaussian-bump", "root-mode-k", "dispersive-random")


class ConfigError(ValueError):
    pass


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _validate_config(raw: dict) -> dict:
    _require(isinstance(raw, dict), "config must be a JSON object")
    grid = raw.get("grid", {})
    L = float(grid.get("L", 40.0))
    n = int(grid.get("n", 1024))
    _require(L > 0, "grid.L must be positive")
    _require(n % 2 == 0 and n >= 8, "grid.n must be even and >= 8")

    scen = raw.get("scenario", {})
    name = scen.get("name", "standing-wave")
    _require(name in SCENARIOS, f"scenario.name must be one of {SCENARIOS}")
    params = scen.get("params", {})

    pert = raw.get("perturbation")
    if pert is not None:
        _require(pert.get("shape") in PERTURBATION_SHAPES,
                 f"perturbation.shape must be one of {PERTURBATION_SHAPES}")
        _require(float(pert.get("amplitude", 0.0)) >= 0, "perturbation.amplitude must be >= 0")

    solver = raw.get("solver", {})
    cfg = {
        "grid": {"L": L, "n": n},
        "scenario": {"name": name, "params": params},
        "perturbation": pert,
        "solver": {
            "dt0": float(solver.get("dt0", 1e-3)),
            "t_end": float(solver.get("t_end", 1.0)),
            "snapshot_stride": int(solver.get("snapshot_stride", 50)),
            "sup_threshold": float(solver.get("sup_threshold", 50.0)),
            "adaptive": bool(solver.get("adaptive", True)),
        },
        "seed": int(raw.get("seed", 0)),
        "name": raw.get("name", "run"),
        "modulate": raw.get("modulate", {}),
        "dfourier": raw.get("dfourier", {}),
    }
    _require(cfg["solver"]["dt0"] > 0 and cfg["solver"]["t_end"] > 0,
             "solver.dt0 and solver.t_end must be positive")
    return cfg


def _load_config(path) -> dict:
    with open(path) as fh:
        return _validate_config(json.load(fh))


def _build_initial(cfg: dict, grid, rng) -> ComplexField:
    name = cfg["scenario"]["name"]
    p = cfg["scenario"]["params"]
    if name == "standing-wave":
        psi = standing_wave(0.0, float(p.get("alpha", 1.0)), grid)
    elif name == "explicit-blowup":
        m = SL2Params(float(p.get("a", 1.0)), float(p.get("b", -1.0)),
                      float(p.get("c", 0.0)), float(p.get("d", 1.0)))
        psi = explicit_blowup(0.0, grid, m)
    else:
        psi = exact_modulated_w(
            0.0, grid, float(p.get("a", 1.0)), float(p.get("b", -1.0)),
            float(p.get("v", 0.0)), float(p.get("gamma0", 0.0)), float(p.get("mu0", 0.0)))
    pert = cfg.get("perturbation")
    if pert is None or float(pert.get("amplitude", 0.0)) == 0.0:
        return psi
    eps = float(pert["amplitude"])
    x = grid.nodes
    if pert["shape"] == "gaussian-bump":
        center = float(pert.get("center", 0.0))
        width = float(pert.get("width", 2.0))
        bump = eps * np.exp(-((x - center) ** 2) / width ** 2)
    elif pert["shape"] == "root-mode-k":
        basis = build_root_basis(grid)
        k = int(pert.get("k", 6))
        _require(1 <= k <= 6, "perturbation.k must be in 1..6")
        bump = eps * basis.eta(k).upper.values
    else:
        width = float(pert.get("width", 2.0))
        noise = rng.standard_normal(grid.point_count) + 1j * rng.standard_normal(grid.point_count)
        envelope = np.exp(-(x / (4 * width)) ** 2)
        smooth = np.fft.ifft(np.fft.fft(noise) * np.exp(-grid.wavenumbers ** 2))
        bump = eps * envelope * smooth / max(np.max(np.abs(envelope * smooth)), 1e-300)
    return ComplexField(grid, psi.values + bump)


def _default_guess(cfg: dict) -> ModParams:
    name = cfg["scenario"]["name"]
    p = cfg["scenario"]["params"]
    user = cfg.get("modulate", {}).get("guess")
    if user is not None:
        return ModParams(float(user["lam"]), float(user["beta"]), float(user["mu"]),
                         float(user["omega"]), float(user["gamma"]))
    if name == "standing-wave":
        return ModParams(float(p.get("alpha", 1.0)) ** 0.5, 0.0, 0.0, 0.0, 0.0)
    a = float(p.get("a", 1.0))
    b = float(p.get("b", -1.0))
    if name == "explicit-blowup":
        c = float(p.get("c", 0.0))
        return ModParams(1.0 / a, -b * a, 0.0, 0.0, c / a)
    v = float(p.get("v", 0.0))
    mu0 = float(p.get("mu0", 0.0))
    gamma0 = float(p.get("gamma0", 0.0))
    return ModParams(1.0 / a, -b * a, mu0, v * a, -1.0 / (b * a) + gamma0)


def _outdir(args, cfg) -> Path:
    root = args.out or os.environ.get("QNLS_OUTPUT_ROOT", "qnls_runs")
    return Path(root) / cfg["name"]


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args)
    grid = make_grid(cfg["grid"]["L"], cfg["grid"]["n"])
    rng = np.random.default_rng(cfg["seed"])
    psi0 = _build_initial(cfg, grid, rng)
    solver = SolverConfig(
        dt0=cfg["solver"]["dt0"],
        t_end=cfg["solver"]["t_end"],
        snapshot_stride=cfg["solver"]["snapshot_stride"],
        adaptive=cfg["solver"]["adaptive"],
        sup_threshold=cfg["solver"]["sup_threshold"],
    )
    traj = run(psi0, solver)
    outdir = _outdir(args, cfg)
    manifest = save_trajectory(traj, outdir)
    _write_diagnostics_csv(traj, outdir / "diagnostics.csv")
    with open(outdir / "config.json", "w") as fh:
        json.dump(cfg, fh, indent=2)
    print(f"wrote {manifest} ({len(traj.times)} snapshots, stop: {traj.stop_reason})")
    return 0


def _write_diagnostics_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mass", "energy", "sup", "h1", "pconf"])
        for row in zip(traj.times, traj.mass, traj.energy, traj.sup, traj.h1, traj.pconf):
            w.writerow([f"{v:.16e}" for v in row])


def cmd_linspec(args) -> int:
    cfg = _load_config(args.config) if args.config else _validate_config({})
    _apply_overrides(cfg, args)
    grid = make_grid(cfg["grid"]["L"], cfg["grid"]["n"])
    basis = build_root_basis(grid)
    g = gram_table(basis)
    n_spec = min(cfg["grid"]["n"], 512)
    report = spectrum_check(build_H(make_grid(cfg["grid"]["L"], n_spec)))
    out = {
        "kappa1": basis.kappa1,
        "kappa2": basis.kappa2,
        "kappa3": basis.kappa3,
        "gram_re": g.real.tolist(),
        "gram_im": g.imag.tolist(),
        "gram_expected": expected_gram(basis).tolist(),
        "spectrum": {
            "near_zero_count": report.near_zero_count,
            "restricted_rank": report.restricted_rank,
            "spectral_gap_ok": report.spectral_gap_ok,
            "cluster_threshold": report.cluster_threshold,
            "min_noncluster_abs_re": report.min_noncluster_abs_re,
            "grid_n": n_spec,
        },
    }
    outdir = _outdir(args, cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "linspec.json"
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2)
    print(f"wrote {path}")
    return 0


def cmd_dfourier(args) -> int:
    cfg = _load_config(args.config) if args.config else _validate_config({})
    _apply_overrides(cfg, args)
    grid = make_grid(cfg["grid"]["L"], cfg["grid"]["n"])
    opts = cfg.get("dfourier", {})
    xi_max = float(opts.get("xi_max", 6.0))
    dxi = float(opts.get("dxi", 0.02))
    spectrum = build_spectrum(grid, xi_max=xi_max, dxi=dxi)
    outdir = _outdir(args, cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "scattering.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "re_s", "im_s", "re_r", "im_r"])
        for p in spectrum.points:
            w.writerow([p.xi, p.s_coef.real, p.s_coef.imag, p.r_coef.real, p.r_coef.imag])
    edge = edge_check(spectrum)
    free = jost_solve(1.0, grid, potential_scale=0.0)
    report = {
        "edge": {
            "s0": [edge["s0"].real, edge["s0"].imag],
            "r0": [edge["r0"].real, edge["r0"].imag],
            "abs_s0": abs(edge["s0"]),
            "abs_r0_plus_1": abs(edge["r0"] + 1.0),
        },
        "free_control": {
            "abs_s_minus_1": abs(free.s_coef - 1.0),
            "abs_r": abs(free.r_coef),
        },
        "unitarity_worst": max(p.unitarity_defect for p in spectrum.points),
    }
    json_path = outdir / "dfourier.json"
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_modulate(args) -> int:
    manifest = Path(args.manifest)
    traj = load_trajectory(manifest)
    with open(manifest.parent / "config.json") as fh:
        cfg = _validate_config(json.load(fh))
    basis = build_root_basis(traj.grid)
    guess = _default_guess(cfg)
    results = track(traj, basis, guess)
    out_csv = manifest.parent / "modulation.csv"
    with open(out_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "lam", "beta", "mu", "omega", "gamma"]
                   + [f"lam{i}" for i in range(1, 7)] + ["r_l2", "r_h1"])
        for t, res in zip(traj.times, results):
            if res is None:
                w.writerow([t] + ["nan"] * 13)
                continue
            pr = res.params
            w.writerow(
                [t, pr.lam, pr.beta, pr.mu, pr.omega, pr.gamma]
                + [float(c.real) for c in res.root_coeffs]
                + [l2_norm(res.radiation), h1_norm(res.radiation)]
            )
    ok = [r for r in results if r is not None]
    report = {"tracked": len(ok), "failed": len(results) - len(ok)}
    if len(ok) >= 20:
        times = [r.params.t for r in ok]
        lams = [r.params.lam for r in ok]
        try:
            verdict = classify_rate(times, lams)
            report["classification"] = {
                "verdict": verdict.verdict,
                "t_blowup": verdict.t_blowup,
                "coefficient": verdict.coefficient,
                "residual_inverse_law": verdict.residual_inverse_law,
                "residual_sqrt_law": verdict.residual_sqrt_law,
            }
        except ValueError as exc:
            report["classification"] = {"error": str(exc)}
    out_json = manifest.parent / "modulation.json"
    with open(out_json, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"wrote {out_csv} and {out_json}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args.config) if args.config else _validate_config({})
    _apply_overrides(cfg, args)
    result = run_battery(cfg["grid"]["L"], cfg["grid"]["n"], seed=cfg["seed"])
    outdir = _outdir(args, cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "verify.json"
    with open(path, "w") as fh:
        json.dump(result, fh, indent=2)
    for c in result["checks"]:
        print(f"{c['status']:4s} {c['name']}: value={c['value']:.3e} threshold={c['threshold']:.3e}")
    print(f"wrote {path}")
    return 0 if result["ok_allowing_warn"] else 2


def cmd_batch(args) -> int:
    with open(args.configs) as fh:
        raw_list = json.load(fh)
    if not isinstance(raw_list, list) or not raw_list:
        raise ConfigError("batch file must be a nonempty JSON array of configs")
    root = Path(args.out or os.environ.get("QNLS_OUTPUT_ROOT", "qnls_runs")) / "batch"
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, raw in enumerate(raw_list):
        cfg = _validate_config(raw)
        if cfg["name"] == "run":
            cfg["name"] = f"row{i:03d}"
        row_dir = root / cfg["name"]
        row_json = row_dir / "row.json"
        if row_json.exists():
            with open(row_json) as fh:
                rows.append(json.load(fh))
            continue
        row = {"name": cfg["name"]}
        try:
            grid = make_grid(cfg["grid"]["L"], cfg["grid"]["n"])
            rng = np.random.default_rng(cfg["seed"])
            psi0 = _build_initial(cfg, grid, rng)
            solver = SolverConfig(
                dt0=cfg["solver"]["dt0"], t_end=cfg["solver"]["t_end"],
                snapshot_stride=cfg["solver"]["snapshot_stride"],
                adaptive=cfg["solver"]["adaptive"],
                sup_threshold=cfg["solver"]["sup_threshold"])
            traj = run(psi0, solver)
            save_trajectory(traj, row_dir)
            with open(row_dir / "config.json", "w") as fh:
                json.dump(cfg, fh, indent=2)
            basis = build_root_basis(grid)
            results = track(traj, basis, _default_guess(cfg))
            ok = [r for r in results if r is not None]
            row.update({"stop_reason": traj.stop_reason, "tracked": len(ok)})
            if len(ok) >= 20:
                try:
                    verdict = classify_rate([r.params.t for r in ok], [r.params.lam for r in ok])
                    row.update({
                        "verdict": verdict.verdict,
                        "t_blowup": verdict.t_blowup,
                        "coefficient": verdict.coefficient,
                    })
                except ValueError as exc:
                    row.update({"verdict": "ERROR", "error": str(exc)})
            else:
                row.update({"verdict": "TOO_FEW_POINTS"})
        except Exception as exc:  # per-row failures recorded, batch continues
            row.update({"verdict": "ERROR", "error": str(exc)})
        row_dir.mkdir(parents=True, exist_ok=True)
        with open(row_json, "w") as fh:
            json.dump(row, fh, indent=2)
        rows.append(row)
    table = root / "classification.csv"
    fields = ["name", "stop_reason", "tracked", "verdict", "t_blowup", "coefficient", "error"]
    with open(table, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow(row)
    print(f"wrote {table} ({len(rows)} rows)")
    return 0


def _apply_overrides(cfg, args) -> None:
    if getattr(args, "grid_L", None) is not None:
        cfg["grid"]["L"] = float(args.grid_L)
    if getattr(args, "grid_n", None) is not None:
        n = int(args.grid_n)
        _require(n % 2 == 0 and n >= 8, "--grid-n must be even and >= 8")
        cfg["grid"]["n"] = n
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = int(args.seed)
    if getattr(args, "name", None) is not None:
        cfg["name"] = args.name


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qnls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", help="output root (default: $QNLS_OUTPUT_ROOT or ./qnls_runs)")
        p.add_argument("--grid-L", dest="grid_L", type=float)
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--name")

    common(sub.add_parser("simulate", help="run the nonlinear evolver on a scenario"))
    common(sub.add_parser("linspec", help="root-space table, kappas, spectrum report"),
           config_required=False)
    common(sub.add_parser("dfourier", help="scattering coefficients and edge report"),
           config_required=False)
    p_mod = sub.add_parser("modulate", help="track modulation parameters of a trajectory")
    p_mod.add_argument("--manifest", required=True, help="trajectory manifest.json")
    common(sub.add_parser("verify", help="run the invariant battery"), config_required=False)
    p_batch = sub.add_parser("batch", help="run a list of simulate+modulate pipelines")
    p_batch.add_argument("--configs", required=True, help="JSON array of run configs")
    p_batch.add_argument("--out")

    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "linspec": cmd_linspec,
        "dfourier": cmd_dfourier,
        "modulate": cmd_modulate,
        "verify": cmd_verify,
        "batch": cmd_batch,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
