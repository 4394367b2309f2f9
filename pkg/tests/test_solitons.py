import numpy as np
import pytest

from qnls import (
    ComplexField,
    GalileiParams,
    SL2Params,
    StandingWaveParams,
    exact_modulated_w,
    explicit_blowup,
    galilei_apply,
    inner,
    l2_norm,
    make_grid,
    pde_residual,
    phi0,
    phi0_prime,
    sl2_apply,
    spectral_derivative,
    standing_wave,
    standing_wave_fn,
)
from qnls.evolve import energy, mass


def fitted_phase_diff(a, b):
    """Max deviation of a from b after removing one global phase."""
    w = np.vdot(b, a)
    phase = w / abs(w)
    return np.max(np.abs(a - phase * b))


def test_phi0_value_at_zero():
    assert phi0(0.0, 1.0) == pytest.approx(3.0 ** 0.25, rel=1e-14)
    x = np.linspace(-5, 5, 101)
    vals = phi0(x)
    assert np.all(vals > 0)
    assert np.max(np.abs(vals - vals[::-1])) < 1e-15


def test_phi0_scaling_identity(rng):
    # critical scaling: phi0(x, a) = a^{1/4} phi0(sqrt(a) x, 1)
    for _ in range(5):
        a = rng.uniform(0.3, 3.0)
        x = rng.uniform(-4, 4, size=50)
        assert np.max(np.abs(phi0(x, a) - a ** 0.25 * phi0(np.sqrt(a) * x, 1.0))) < 1e-12


def test_phi0_rejects_bad_alpha():
    with pytest.raises(ValueError):
        phi0(0.0, -1.0)
    with pytest.raises(ValueError):
        StandingWaveParams(0.0)


def test_phi0_ode_residual(grid):
    f = ComplexField(grid, phi0(grid.nodes))
    d2 = spectral_derivative(f, 2).values.real
    residual = d2 - f.values.real + f.values.real ** 5
    assert np.max(np.abs(residual)) < 1e-8


def test_phi0_prime_matches_derivative(grid):
    f = ComplexField(grid, phi0(grid.nodes))
    d1 = spectral_derivative(f, 1).values.real
    assert np.max(np.abs(d1 - phi0_prime(grid.nodes))) < 1e-9


def test_standing_wave_basics(grid):
    w0 = standing_wave(0.0, 1.0, grid)
    assert np.max(np.abs(w0.values.imag)) == 0.0
    assert np.all(w0.values.real > 0)
    m0 = mass(w0)
    for t in (0.7, 3.1):
        assert mass(standing_wave(t, 1.0, grid)) == pytest.approx(m0, rel=1e-14)


def test_standing_wave_energy_zero(grid):
    # Pohozaev oracle for the critical ground state: int phi0'^2 = (1/3) int phi0^6
    x = grid.nodes
    h = grid.spacing
    kin = h * np.sum(phi0_prime(x) ** 2)
    six = h * np.sum(phi0(x) ** 6)
    assert kin == pytest.approx(six / 3.0, rel=1e-10)
    assert abs(energy(standing_wave(0.0, 1.0, grid))) < 1e-6


def test_galilei_identity(grid):
    psi = standing_wave_fn(1.0)
    out = galilei_apply(psi, GalileiParams(0.0, 0.0, 0.0), 0.3, grid)
    assert np.max(np.abs(out.values - psi(0.3, grid.nodes))) < 1e-14


def test_galilei_mass_preserved(grid, rng):
    psi = standing_wave_fn(1.0)
    m0 = mass(galilei_apply(psi, GalileiParams(0.0, 0.0, 0.0), 0.0, grid))
    for _ in range(5):
        g = GalileiParams(rng.uniform(-3, 3), rng.uniform(-1, 1), rng.uniform(-3, 3))
        assert mass(galilei_apply(psi, g, 0.4, grid)) == pytest.approx(m0, rel=1e-13)


def test_galilei_composition(grid):
    psi = standing_wave_fn(1.0)
    g1 = GalileiParams(0.3, 0.5, 1.0)
    g2 = GalileiParams(-0.2, 0.3, -0.7)
    t = 0.37

    def boosted(tt, x):
        return np.exp(1j * (g1.gamma + g1.v * x - g1.v ** 2 * tt)) * psi(
            tt, x - 2 * tt * g1.v - g1.mu0)

    seq = galilei_apply(boosted, g2, t, grid)
    combined = galilei_apply(
        psi, GalileiParams(g1.gamma + g2.gamma, g1.v + g2.v, g1.mu0 + g2.mu0), t, grid)
    assert fitted_phase_diff(seq.values, combined.values) < 1e-10


def test_sl2_determinant_enforced():
    with pytest.raises(ValueError):
        SL2Params(1.0, 1.0, 1.0, 1.0)


def test_sl2_identity(grid):
    psi = standing_wave_fn(1.0)
    out = sl2_apply(psi, SL2Params(1, 0, 0, 1), 0.5, grid)
    assert np.max(np.abs(out.values - psi(0.5, grid.nodes))) < 1e-14


def test_sl2_rescaling(grid):
    psi = standing_wave_fn(1.0)
    a = 1.3
    out = sl2_apply(psi, SL2Params(1.0 / a, 0.0, 0.0, a), 0.2, grid)
    expected = a ** 0.5 * psi(a ** 2 * 0.2, a * grid.nodes)
    assert np.max(np.abs(out.values - expected)) < 1e-12


def test_sl2_mass_invariance(grid):
    psi = standing_wave_fn(1.0)
    m0 = mass(standing_wave(0.0, 1.0, grid))
    out = sl2_apply(psi, SL2Params(1, -1, 0, 1), 0.5, grid)
    assert mass(out) == pytest.approx(m0, rel=1e-6)


def test_sl2_blowup_time_guard(grid):
    psi = standing_wave_fn(1.0)
    with pytest.raises(ValueError, match="blow-up"):
        sl2_apply(psi, SL2Params(1, -1, 0, 1), 1.0, grid)
    with pytest.raises(ValueError, match="blow-up"):
        explicit_blowup(1.0, grid, SL2Params(1, -1, 0, 1))


def test_explicit_blowup_at_zero(grid):
    m = SL2Params(1, -1, 0, 1)
    f = explicit_blowup(0.0, grid, m)
    expected = np.exp(-1j * grid.nodes ** 2 / 4.0) * phi0(grid.nodes)
    assert np.max(np.abs(f.values - expected)) < 1e-14
    assert np.max(np.abs(f.values)) == pytest.approx(3.0 ** 0.25, rel=1e-12)


def test_explicit_blowup_mass_constant():
    # the t=0.9 profile is lambda=10 narrow: quadrature needs the fine grid
    fine = make_grid(40.0, 4096)
    m = SL2Params(1, -1, 0, 1)
    norms = [l2_norm(explicit_blowup(t, fine, m)) for t in (0.0, 0.5, 0.9)]
    assert np.max(np.abs(np.diff(norms))) < 1e-10 * norms[0]


def test_explicit_blowup_peak_scaling(grid):
    m = SL2Params(1, -1, 0, 1)
    vals = [np.max(np.abs(explicit_blowup(t, grid, m).values)) * np.sqrt(1.0 - t)
            for t in (0.0, 0.3, 0.6, 0.9)]
    assert np.max(np.abs(np.diff(vals))) < 1e-8


def test_explicit_blowup_b_zero_is_galilei_standing_wave(grid):
    # b = 0 removes the quadratic phase: a rescaled standing wave
    m = SL2Params(2.0, 0.0, 0.3, 0.5)
    t = 0.4
    f = explicit_blowup(t, grid, m)
    expected = 2.0 ** -0.5 * np.exp(1j * (m.c + m.d * t) / 2.0) * phi0(grid.nodes / 2.0)
    assert np.max(np.abs(f.values - expected)) < 1e-10


def test_exact_modulated_w_at_zero(grid):
    w = exact_modulated_w(0.0, grid, a=1.0, b=-1.0, v=0.0)
    expected = np.exp(1j * (1.0 - grid.nodes ** 2 / 4.0)) * phi0(grid.nodes)
    assert np.max(np.abs(w.values - expected)) < 1e-12


def test_exact_modulated_w_is_group_orbit(grid):
    # pseudo-conformal image of the standing wave followed by a Galilei boost
    a, b, v, gamma0, mu0 = 1.0, -1.0, 0.3, 0.2, -0.5
    t = 0.4
    w = exact_modulated_w(t, grid, a, b, v, gamma0, mu0)
    psi = standing_wave_fn(1.0)

    def conformal(tt, x):
        s = a + b * tt
        return s ** -0.5 * np.exp(1j * b * x ** 2 / (4 * s)) * psi((-1.0 / b + 0.0 * tt) / s, x / s)

    orbit = galilei_apply(conformal, GalileiParams(gamma0 - v * mu0, v, mu0), t, grid)
    assert fitted_phase_diff(w.values, orbit.values) < 1e-9


def test_pde_residual_standing(grid):
    d = 1e-4
    r = pde_residual(standing_wave(-d, 1.0, grid), standing_wave(0.0, 1.0, grid),
                     standing_wave(d, 1.0, grid), d)
    assert r < 1e-6


def test_pde_residual_explicit(grid):
    m = SL2Params(1, -1, 0, 1)
    d = 1e-5
    r = pde_residual(explicit_blowup(0.5 - d, grid, m), explicit_blowup(0.5, grid, m),
                     explicit_blowup(0.5 + d, grid, m), d)
    assert r < 1e-4


def test_pde_residual_modulated_w(grid):
    d = 1e-5
    args = dict(a=1.0, b=-1.0, v=0.2, gamma0=0.1, mu0=0.3)
    r = pde_residual(exact_modulated_w(0.5 - d, grid, **args),
                     exact_modulated_w(0.5, grid, **args),
                     exact_modulated_w(0.5 + d, grid, **args), d)
    assert r < 1e-4


def test_pde_residual_zero_field(grid):
    z = ComplexField(grid, np.zeros(grid.point_count))
    assert pde_residual(z, z, z, 1e-4) == 0.0


def test_pde_residual_rejects_bad_delta(grid):
    z = ComplexField(grid, np.zeros(grid.point_count))
    with pytest.raises(ValueError):
        pde_residual(z, z, z, 0.0)


def test_group_invariance_of_residual(grid):
    # a Galilei transform of a verified solution still solves the equation
    g = GalileiParams(0.4, 0.3, 1.2)
    psi = standing_wave_fn(1.0)
    d = 1e-4
    snaps = [galilei_apply(psi, g, t, grid) for t in (-d, 0.0, d)]
    assert pde_residual(*snaps, d) < 1e-6
