import numpy as np
import pytest

from qnls import (
    ComplexField,
    VectorField,
    apply_H,
    apply_H_star,
    build_H,
    build_L_operators,
    build_root_basis,
    expected_gram,
    gram_table,
    inner,
    l2_norm,
    make_grid,
    phi0,
    phi0_prime,
    project,
    solve_rho,
    spectrum_check,
)

from conftest import schwartz_like


def vec(grid, up, lo):
    return VectorField(ComplexField(grid, up), ComplexField(grid, lo))


def vnorm(f):
    return np.sqrt(l2_norm(f.upper) ** 2 + l2_norm(f.lower) ** 2)


def vmax(f):
    return max(np.max(np.abs(f.upper.values)), np.max(np.abs(f.lower.values)))


# ---------------------------------------------------------------------------
# scalar operators and the exotic profile
# ---------------------------------------------------------------------------

def test_scalar_chain_identities(grid):
    ops = build_L_operators(grid)
    x = grid.nodes
    p0 = phi0(x)
    lam0 = 0.5 * p0 + x * phi0_prime(x)
    assert np.max(np.abs(ops.minus(p0))) < 1e-8
    assert np.max(np.abs(ops.plus(lam0) + 2.0 * p0)) < 1e-7
    assert np.max(np.abs(ops.minus(x ** 2 * p0) + 4.0 * lam0)) < 1e-7


def test_L_operators_need_resolving_grid():
    with pytest.raises(ValueError):
        build_L_operators(make_grid(20.0, 512))


def test_rho_parity_and_residual(grid):
    rho = solve_rho(grid)
    ops = build_L_operators(grid)
    flip = (-np.arange(grid.point_count)) % grid.point_count
    assert np.max(np.abs(rho.values - rho.values[flip])) < 1e-9
    rhs = grid.nodes ** 2 * phi0(grid.nodes)
    assert np.max(np.abs(ops.plus(rho.values.real) - rhs)) < 1e-8


def test_kappa2_two_ways(grid):
    rho = solve_rho(grid)
    h = grid.spacing
    p0 = phi0(grid.nodes)
    via_rho = h * np.sum(rho.values.real * p0)
    via_moment = 0.5 * h * np.sum(grid.nodes ** 2 * p0 ** 2)
    assert via_rho == pytest.approx(via_moment, rel=1e-7)


# ---------------------------------------------------------------------------
# root basis, kappas, Gram table
# ---------------------------------------------------------------------------

def test_kappa_closed_forms(basis):
    # independent oracles: phi0^2 = sqrt(3) sech(2x) gives kappa1 = sqrt(3) pi/2
    # and kappa2 = (1/2) int x^2 phi0^2 = sqrt(3) pi^3 / 64
    assert basis.kappa1 == pytest.approx(np.sqrt(3.0) * np.pi / 2.0, rel=1e-8)
    from scipy.integrate import quad
    val, err = quad(lambda x: 0.5 * np.sqrt(3.0) * x * x / np.cosh(2 * x), -60, 60,
                    limit=400)
    assert err < 1e-12
    assert basis.kappa2 == pytest.approx(val, rel=1e-8)
    assert basis.kappa2 == pytest.approx(np.sqrt(3.0) * np.pi ** 3 / 64.0, rel=1e-8)
    assert basis.kappa1 > 0 and basis.kappa2 > 0


def test_kappa3_against_refined_grid(grid, basis):
    fine = build_root_basis(make_grid(grid.half_length, 4 * grid.point_count))
    assert basis.kappa3 == pytest.approx(fine.kappa3, rel=1e-6)


def test_grid_refinement_convergence(grid, basis):
    finer = build_root_basis(make_grid(grid.half_length, 2 * grid.point_count))
    assert abs(basis.kappa1 - finer.kappa1) < 1e-6
    assert abs(basis.kappa2 - finer.kappa2) < 1e-6
    assert abs(basis.kappa3 - finer.kappa3) < 1e-6
    dg = np.max(np.abs(gram_table(basis) - gram_table(finer)))
    assert dg < 1e-6


def test_basis_parity(basis):
    flip = (-np.arange(basis.grid.point_count)) % basis.grid.point_count
    even = [1, 2, 5, 6]
    odd = [3, 4]
    for i in even:
        for comp in (basis.eta(i).upper, basis.eta(i).lower,
                     basis.xi(i).upper, basis.xi(i).lower):
            assert np.max(np.abs(comp.values - comp.values[flip])) < 1e-10
    for i in odd:
        for comp in (basis.eta(i).upper, basis.eta(i).lower,
                     basis.xi(i).upper, basis.xi(i).lower):
            assert np.max(np.abs(comp.values + comp.values[flip])) < 1e-10


def test_gram_table_matches_signed_table(basis):
    g = gram_table(basis)
    e = expected_gram(basis)
    scale = max(basis.kappa1, basis.kappa2, abs(basis.kappa3))
    nonzero = e != 0
    assert np.sum(nonzero) == 8
    assert np.max(np.abs(g[~nonzero])) < 1e-8 * scale
    assert np.max(np.abs((g[nonzero] - e[nonzero]) / e[nonzero])) < 1e-7
    # spot values straight from the table
    k1, k2, k3 = basis.kappa1, basis.kappa2, basis.kappa3
    assert g[5, 0] == pytest.approx(2 * k2, rel=1e-7)
    assert g[4, 1] == pytest.approx(-4 * k2, rel=1e-7)
    assert g[3, 2] == pytest.approx(-k1, rel=1e-7)
    assert g[2, 3] == pytest.approx(-k1, rel=1e-7)
    assert g[1, 4] == pytest.approx(-4 * k2, rel=1e-7)
    assert g[5, 4] == pytest.approx(2 * k3, rel=1e-7)
    assert g[0, 5] == pytest.approx(2 * k2, rel=1e-7)
    assert g[4, 5] == pytest.approx(2 * k3, rel=1e-7)


# ---------------------------------------------------------------------------
# projection
# ---------------------------------------------------------------------------

def test_project_basis_vector(basis):
    lam, fdis = project(basis.eta(3), basis)
    expected = np.zeros(6)
    expected[2] = 1.0
    assert np.max(np.abs(lam - expected)) < 1e-8
    assert vnorm(fdis) < 1e-8


def test_project_idempotent(grid, basis, rng):
    f = vec(grid, schwartz_like(grid, rng), schwartz_like(grid, rng))
    _, fdis = project(f, basis)
    lam2, _ = project(fdis, basis)
    assert np.max(np.abs(lam2)) < 1e-8
    for xi in basis.xis:
        assert abs(inner(fdis, xi)) < 1e-10 * vnorm(f)


def test_project_reconstruction(grid, basis, rng):
    f = vec(grid, schwartz_like(grid, rng), schwartz_like(grid, rng))
    lam, fdis = project(f, basis)
    up = fdis.upper.values + sum(c * e.upper.values for c, e in zip(lam, basis.etas))
    lo = fdis.lower.values + sum(c * e.lower.values for c, e in zip(lam, basis.etas))
    assert np.max(np.abs(up - f.upper.values)) < 1e-10
    assert np.max(np.abs(lo - f.lower.values)) < 1e-10


# ---------------------------------------------------------------------------
# the matrix operator
# ---------------------------------------------------------------------------

def test_kernel_vectors(grid, basis):
    op = build_H(grid)
    assert vmax(apply_H(op, basis.eta(1))) < 1e-8
    assert vmax(apply_H(op, basis.eta(3))) < 1e-8


def test_generalized_chain(grid, basis):
    # symbolic oracle: H eta2 = -2i eta1, H eta4 = 2i eta3,
    # H eta5 = 4i eta2, H eta6 = i eta5 (from the L+- chain)
    op = build_H(grid)
    chain = {2: (1, -2j), 4: (3, 2j), 5: (2, 4j), 6: (5, 1j)}
    for i, (j, c) in chain.items():
        out = apply_H(op, basis.eta(i))
        dev = max(
            np.max(np.abs(out.upper.values - c * basis.eta(j).upper.values)),
            np.max(np.abs(out.lower.values - c * basis.eta(j).lower.values)),
        )
        assert dev < 1e-7


def test_root_chain_closure(grid, basis):
    op = build_H(grid)
    for i in range(1, 7):
        out = apply_H(op, basis.eta(i))
        _, remainder = project(out, basis)
        assert vnorm(remainder) < 1e-7


def test_matrix_free_matches_dense(basis, rng):
    small = make_grid(40.0, 512)
    op = build_H(small)
    u = schwartz_like(small, rng)
    v = schwartz_like(small, rng)
    f = vec(small, u, v)
    out = apply_H(op, f)
    dense = op.matrix() @ np.concatenate([u, v])
    got = np.concatenate([out.upper.values, out.lower.values])
    assert np.max(np.abs(got - dense)) < 1e-10
    # adjoint matrix flips the off-diagonal signs
    star = op.matrix_star()
    mat = op.matrix()
    n = small.point_count
    assert np.max(np.abs(star[:n, n:] + mat[:n, n:])) < 1e-12
    assert np.max(np.abs(star[:n, :n] - mat[:n, :n])) < 1e-12


def test_duality(grid, basis, rng):
    op = build_H(grid)
    f = vec(grid, schwartz_like(grid, rng), schwartz_like(grid, rng))
    g = vec(grid, schwartz_like(grid, rng), schwartz_like(grid, rng))
    lhs = inner(apply_H(op, f), g)
    rhs = inner(f, apply_H_star(op, g))
    assert abs(lhs - rhs) < 1e-9 * abs(lhs)


def test_dense_assembly_capped():
    big = make_grid(40.0, 4096)
    with pytest.raises(ValueError):
        build_H(big).matrix()


def test_spectrum_structure():
    report = spectrum_check(build_H(make_grid(40.0, 512)))
    assert report.near_zero_count == 6
    assert report.restricted_rank == 4
    assert report.spectral_gap_ok
    assert report.min_noncluster_abs_re >= 0.98
