import numpy as np
import pytest

from qnls import (
    ComplexField,
    VectorField,
    field_from_csv,
    field_to_csv,
    inner,
    l2_norm,
    make_grid,
    read_snapshot,
    spectral_derivative,
    trig_interpolate,
    write_snapshot,
)
from qnls.solitons import phi0

from conftest import schwartz_like


def test_grid_layout():
    g = make_grid(40.0, 1024)
    assert g.spacing == pytest.approx(0.078125)
    assert g.nodes[0] == -40.0
    assert np.all(np.diff(g.nodes) > 0)
    positive = np.sort(g.wavenumbers[g.wavenumbers > 0])
    assert positive[0] == pytest.approx(np.pi / 40.0)
    # symmetric except the single Nyquist mode
    ks = np.sort(g.wavenumbers)
    assert np.sum(ks < 0) == np.sum(ks > 0) + 1


@pytest.mark.parametrize("bad", [(40.0, 7), (40.0, 1023)])
def test_grid_rejects_odd_n(bad):
    with pytest.raises(ValueError, match="even"):
        make_grid(*bad)


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        make_grid(-1.0, 64)
    with pytest.raises(ValueError):
        make_grid(40.0, 4)


def test_derivative_sine(grid):
    f = ComplexField(grid, np.sin(np.pi * grid.nodes / 40.0))
    d = spectral_derivative(f, 1)
    expected = (np.pi / 40.0) * np.cos(np.pi * grid.nodes / 40.0)
    assert np.max(np.abs(d.values - expected)) < 1e-10


def test_derivative_constant(grid):
    f = ComplexField(grid, np.ones(grid.point_count))
    for order in (1, 2, 3):
        assert np.max(np.abs(spectral_derivative(f, order).values)) < 1e-12


def test_derivative_gaussian_second(grid):
    x = grid.nodes
    f = ComplexField(grid, np.exp(-x ** 2))
    d2 = spectral_derivative(f, 2)
    expected = (4.0 * x ** 2 - 2.0) * np.exp(-x ** 2)
    assert np.max(np.abs(d2.values - expected)) < 1e-8


def test_derivative_rejects_order_zero(grid):
    f = ComplexField(grid, np.zeros(grid.point_count))
    with pytest.raises(ValueError):
        spectral_derivative(f, 0)


def test_derivative_composition(grid, rng):
    f = ComplexField(grid, schwartz_like(grid, rng))
    twice = spectral_derivative(spectral_derivative(f, 1), 1)
    once = spectral_derivative(f, 2)
    assert np.max(np.abs(twice.values - once.values)) < 1e-9


def test_inner_positivity_and_orthogonality(grid):
    x = grid.nodes
    f = ComplexField(grid, np.sin(np.pi * x / 40.0))
    g2 = ComplexField(grid, np.sin(2.0 * np.pi * x / 40.0))
    assert inner(f, f).imag == 0.0
    assert inner(f, f).real > 0
    assert abs(inner(f, g2)) < 1e-12


def test_inner_soliton_mass(grid):
    # closed form: phi0^2 = sqrt(3) sech(2x), integral = sqrt(3) pi / 2
    f = ComplexField(grid, phi0(grid.nodes))
    assert inner(f, f).real == pytest.approx(np.sqrt(3.0) * np.pi / 2.0, rel=1e-10)


def test_inner_hermitian(grid, rng):
    f = ComplexField(grid, schwartz_like(grid, rng))
    g2 = ComplexField(grid, schwartz_like(grid, rng))
    assert abs(inner(f, g2) - np.conj(inner(g2, f))) < 1e-14


def test_inner_grid_mismatch(grid):
    other = make_grid(40.0, 512)
    with pytest.raises(ValueError):
        inner(ComplexField(grid, np.zeros(1024)), ComplexField(other, np.zeros(512)))


def test_vector_inner(grid, rng):
    u = schwartz_like(grid, rng)
    v = schwartz_like(grid, rng)
    f = VectorField(ComplexField(grid, u), ComplexField(grid, v))
    expected = inner(f.upper, f.upper) + inner(f.lower, f.lower)
    assert inner(f, f) == pytest.approx(expected)


def test_round_trip_and_parseval(grid, rng):
    vals = schwartz_like(grid, rng)
    back = np.fft.ifft(np.fft.fft(vals))
    assert np.max(np.abs(back - vals)) / np.max(np.abs(vals)) < 1e-12
    phys = grid.spacing * np.sum(np.abs(vals) ** 2)
    spec = (grid.spacing / grid.point_count) * np.sum(np.abs(np.fft.fft(vals)) ** 2)
    assert phys == pytest.approx(spec, rel=1e-12)


def test_trig_interpolation_exact_for_bandlimited(grid, rng):
    f = ComplexField(grid, schwartz_like(grid, rng))
    pts = np.linspace(-20.0, 20.0, 57)
    direct = trig_interpolate(f, grid.nodes[400:420])
    assert np.max(np.abs(direct - f.values[400:420])) < 1e-11
    vals = trig_interpolate(f, pts)
    assert np.all(np.isfinite(vals))


def test_field_validation(grid):
    with pytest.raises(ValueError, match="corrupted"):
        ComplexField(grid, np.full(grid.point_count, np.nan))
    with pytest.raises(ValueError, match="length"):
        ComplexField(grid, np.zeros(17))


def test_vector_field_grid_mismatch(grid):
    other = make_grid(40.0, 512)
    with pytest.raises(ValueError):
        VectorField(ComplexField(grid, np.zeros(1024)), ComplexField(other, np.zeros(512)))


def test_csv_round_trip(tmp_path, grid, rng):
    f = ComplexField(grid, schwartz_like(grid, rng))
    path = tmp_path / "field.csv"
    field_to_csv(f, path)
    g2 = field_from_csv(path)
    assert g2.grid == f.grid
    assert np.max(np.abs(g2.values - f.values)) < 1e-12


def test_snapshot_round_trip(tmp_path, grid, rng):
    f = ComplexField(grid, schwartz_like(grid, rng))
    path = tmp_path / "field.bin"
    write_snapshot(f, path)
    g2 = read_snapshot(path)
    assert g2.grid == f.grid
    assert np.array_equal(g2.values, f.values)
