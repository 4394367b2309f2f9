"""Cross-module invariant battery with a machine-readable verdict.

Each check returns PASS/FAIL, or WARN instead of FAIL when the grid is too
coarse for the check's tolerance to be meaningful (resolution study: the
spectral residuals degrade by ~5 orders of magnitude between n=1024 and
n=256 at L=40, so anything below n=512 or L<30 only warns).
"""

from __future__ import annotations

import numpy as np

from .evolve import SolverConfig, energy, mass, null_form_check, run
from .grids import ComplexField, Grid1D, VectorField, inner, l2_norm, make_grid
from .linearized import (
    build_H,
    build_L_operators,
    build_root_basis,
    expected_gram,
    gram_table,
    project,
    solve_rho,
    spectrum_check,
)
from .modulation import ModParams, build_w, decompose
from .scattering import build_spectrum, distorted_transform, edge_check, jost_solve, reconstruct
from .solitons import phi0, phi0_prime, standing_wave

__all__ = ["run_battery"]

KAPPA1_CLOSED_FORM = np.sqrt(3.0) * np.pi / 2.0


def _check(name, value, threshold, sensitive, resolved, larger_is_bad=True):
    ok = (value <= threshold) if larger_is_bad else (value >= threshold)
    if ok:
        status = "PASS"
    elif sensitive and not resolved:
        status = "WARN"
    else:
        status = "FAIL"
    return {
        "name": name,
        "status": status,
        "value": float(value),
        "threshold": float(threshold),
    }


def run_battery(
    L: float = 40.0,
    n: int = 1024,
    kappa2_override: float | None = None,
    seed: int = 0,
) -> dict:
    """Run every module's invariant checks on one grid.

    kappa2_override is a fault-injection hook for testing the battery itself:
    it corrupts the Gram comparison (and only that) so the corresponding
    check must fail while the others stay green.
    """
    grid = make_grid(L, n)
    resolved = n >= 512 and L >= 30.0
    checks = []
    x = grid.nodes
    p0 = phi0(x)
    rng = np.random.default_rng(seed)

    # soliton ODE and chain identities
    ops = build_L_operators(grid)
    d2 = np.fft.ifft(-grid.wavenumbers ** 2 * np.fft.fft(p0)).real
    checks.append(_check(
        "soliton_ode_residual", np.max(np.abs(d2 - p0 + p0 ** 5)), 1e-8, True, resolved))
    checks.append(_check(
        "L_minus_kernel", np.max(np.abs(ops.minus(p0))), 1e-8, True, resolved))
    lam0 = 0.5 * p0 + x * phi0_prime(x)
    checks.append(_check(
        "L_plus_scaling", np.max(np.abs(ops.plus(lam0) + 2 * p0)), 1e-7, True, resolved))
    checks.append(_check(
        "L_minus_z2phi", np.max(np.abs(ops.minus(x ** 2 * p0) + 4 * lam0)), 1e-7, True, resolved))

    # root space and Gram table
    basis = build_root_basis(grid)
    if kappa2_override is not None:
        from dataclasses import replace

        basis = replace(basis, kappa2=float(kappa2_override))
    g_num = gram_table(basis)
    g_exp = expected_gram(basis)
    scale = max(basis.kappa1, basis.kappa2, abs(basis.kappa3))
    nonzero = g_exp != 0
    checks.append(_check(
        "gram_zero_entries", np.max(np.abs(g_num[~nonzero])), 1e-8 * scale, True, resolved))
    checks.append(_check(
        "gram_nonzero_entries",
        np.max(np.abs((g_num[nonzero] - g_exp[nonzero]) / g_exp[nonzero])),
        1e-6, True, resolved))
    checks.append(_check(
        "kappa1_closed_form", abs(basis.kappa1 / KAPPA1_CLOSED_FORM - 1.0), 1e-8, True, resolved))
    checks.append(_check(
        "rho_residual",
        np.max(np.abs(ops.plus(basis.rho.values.real) - x ** 2 * p0)), 1e-8, True, resolved))

    # projection identities (Schwartz-like test field: filtered noise under a
    # Gaussian envelope; pointwise white noise is not smooth enough for the
    # spectral identities)
    def schwartz_like(width=10.0, k_cut=3.0):
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        smooth = np.fft.ifft(np.exp(-((grid.wavenumbers / k_cut) ** 2)) * np.fft.fft(noise))
        return smooth * np.exp(-x ** 2 / width)

    u = schwartz_like()
    v = schwartz_like(12.0)
    f = VectorField(ComplexField(grid, u + 0.3j * v), ComplexField(grid, v - 0.2j * u))
    lam, fdis = project(f, basis)
    recon = np.max(np.abs(
        fdis.upper.values + sum(c * e.upper.values for c, e in zip(lam, basis.etas))
        - f.upper.values))
    checks.append(_check("projection_reconstruction", recon, 1e-10, False, resolved))
    lam2, _ = project(fdis, basis)
    checks.append(_check("projection_idempotent", np.max(np.abs(lam2)), 1e-8, False, resolved))

    # spectrum of the discretized operator (dense; capped size)
    n_spec = min(n, 512)
    spec_grid = make_grid(L, n_spec)
    report = spectrum_check(build_H(spec_grid))
    checks.append(_check(
        "spectrum_cluster_count", abs(report.near_zero_count - 6), 0.5, True, resolved))
    checks.append(_check(
        "spectrum_restricted_rank", abs(report.restricted_rank - 4), 0.5, True, resolved))
    checks.append(_check(
        "spectrum_gap", report.min_noncluster_abs_re, 0.98, True, resolved, larger_is_bad=False))

    # scattering edge and free control
    edge = edge_check(grid)
    checks.append(_check("edge_s0", abs(edge["s0"]), 1e-2, True, resolved))
    checks.append(_check("edge_r0_plus_1", abs(edge["r0"] + 1.0), 1e-2, True, resolved))
    free = jost_solve(1.0, grid, potential_scale=0.0)
    checks.append(_check(
        "free_control_s_equals_1", abs(free.s_coef - 1.0) + abs(free.r_coef), 1e-8, True, resolved))

    # distorted reconstruction and Plancherel on one field
    spectrum = build_spectrum(grid, dxi=0.02)
    fp, fm = distorted_transform(fdis, spectrum)
    rec = reconstruct(spectrum, fp, fm, free_tail_of=fdis)
    rel = np.sqrt(
        l2_norm(ComplexField(grid, rec.upper.values - fdis.upper.values)) ** 2
        + l2_norm(ComplexField(grid, rec.lower.values - fdis.lower.values)) ** 2
    ) / np.sqrt(l2_norm(fdis.upper) ** 2 + l2_norm(fdis.lower) ** 2)
    checks.append(_check("distorted_reconstruction", rel, 1e-3, True, resolved))

    # pseudo-conformal product identity
    uu = ComplexField(grid, schwartz_like(9.0))
    checks.append(_check("null_form_identity", null_form_check(uu, 3.0), 1e-10, True, resolved))

    # conservation on a short standing-wave run
    traj = run(standing_wave(0.0, 1.0, grid), SolverConfig(dt0=1e-3, t_end=0.5, snapshot_stride=100))
    checks.append(_check(
        "mass_conservation", abs(traj.mass[-1] / traj.mass[0] - 1.0), 1e-12, False, resolved))
    checks.append(_check(
        "energy_conservation", abs(traj.energy[-1] - traj.energy[0]) / traj.h1[0] ** 2,
        1e-5, True, resolved))

    # modulation round trip
    params = ModParams(1.2, 0.3, -0.5, 0.2, 0.4)
    dec = decompose(build_w(params, grid), 0.0, ModParams(1.1, 0.25, -0.45, 0.15, 0.35), basis)
    checks.append(_check(
        "modulation_round_trip",
        np.max(np.abs(dec.params.as_array() - params.as_array())), 1e-10, False, resolved))

    ok = all(c["status"] == "PASS" for c in checks)
    ok_with_warn = all(c["status"] in ("PASS", "WARN") for c in checks)
    return {
        "grid": {"L": L, "n": n},
        "resolved": resolved,
        "checks": checks,
        "ok": ok,
        "ok_allowing_warn": ok_with_warn,
    }
