"""Periodic spectral grid, complex fields, derivatives, quadrature, and pairings.

The grid covers [-L, L) with n uniform nodes and the standard FFT wavenumber
set k_m = m*pi/L, m = -n/2 .. n/2-1.  A large L stands in for the whole line;
every profile handled by this package decays at least exponentially, so the
periodic wrap is below the working tolerances.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "ComplexField",
    "VectorField",
    "make_grid",
    "make_field",
    "spectral_derivative",
    "inner",
    "l2_norm",
    "trig_interpolate",
    "field_to_csv",
    "field_from_csv",
    "write_snapshot",
    "read_snapshot",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L, L) with FFT wavenumbers.

    Attributes
    ----------
    half_length : float
        L, half the period.
    point_count : int
        n, number of nodes (even, >= 8).
    spacing : float
        h = 2L/n.
    nodes : ndarray
        x_j = -L + j*h, j = 0..n-1.
    wavenumbers : ndarray
        k_m = m*pi/L in numpy fft layout (0, 1, .., n/2-1, -n/2, .., -1).
    """

    half_length: float
    point_count: int
    spacing: float
    nodes: np.ndarray
    wavenumbers: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.wavenumbers.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, Grid1D):
            return NotImplemented
        return (
            self.half_length == other.half_length
            and self.point_count == other.point_count
        )

    def __hash__(self):
        return hash((self.half_length, self.point_count))

    @property
    def nyquist_index(self) -> int:
        return self.point_count // 2


def make_grid(L: float, n: int) -> Grid1D:
    """Build the periodic grid on [-L, L) with n nodes."""
    if not np.isfinite(L) or L <= 0:
        raise ValueError("L must be positive and finite")
    if n % 2 != 0:
        raise ValueError("n must be even")
    if n < 8:
        raise ValueError("n must be at least 8")
    h = 2.0 * L / n
    x = -L + h * np.arange(n)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)  # equals m*pi/L
    return Grid1D(float(L), int(n), h, x, k)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a Grid1D.  Immutable; NaN/Inf entries are rejected."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.point_count,):
            raise ValueError(
                f"field length {v.shape} does not match grid n={self.grid.point_count}"
            )
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise ValueError("field contains NaN/Inf (corrupted state)")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def make_field(grid: Grid1D, values: np.ndarray) -> ComplexField:
    return ComplexField(grid, values)


@dataclass(frozen=True)
class VectorField:
    """Pair (upper, lower) of complex fields on one shared grid."""

    upper: ComplexField
    lower: ComplexField

    def __post_init__(self):
        if self.upper.grid != self.lower.grid:
            raise ValueError("vector field components live on different grids")

    @property
    def grid(self) -> Grid1D:
        return self.upper.grid


def spectral_derivative(f: ComplexField, order: int = 1) -> ComplexField:
    """d^order/dx^order via (i k)^order in transform space.

    The Nyquist mode is zeroed for odd orders so real fields stay real.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    grid = f.grid
    mult = (1j * grid.wavenumbers) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[grid.nyquist_index] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(f.values))
    return ComplexField(grid, out)


def _pair_arrays(f: np.ndarray, g: np.ndarray, h: float) -> complex:
    return complex(h * np.sum(f * np.conj(g)))


def inner(f, g) -> complex:
    """Hermitian pairing h * sum f_j * conj(g_j); conjugation on the SECOND slot.

    For vector fields the component pairings add.  This convention is what
    reproduces the signed root-space Gram table (see linearized module).
    """
    if isinstance(f, ComplexField) and isinstance(g, ComplexField):
        if f.grid != g.grid:
            raise ValueError("inner(): fields on different grids")
        return _pair_arrays(f.values, g.values, f.grid.spacing)
    if isinstance(f, VectorField) and isinstance(g, VectorField):
        if f.grid != g.grid:
            raise ValueError("inner(): fields on different grids")
        h = f.grid.spacing
        return _pair_arrays(f.upper.values, g.upper.values, h) + _pair_arrays(
            f.lower.values, g.lower.values, h
        )
    raise TypeError("inner() expects two ComplexField or two VectorField")


def l2_norm(f) -> float:
    return float(np.sqrt(max(inner(f, f).real, 0.0)))


def trig_interpolate(f: ComplexField, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of f at arbitrary points.

    Band-limited (exact for grid-resolved content); the Nyquist mode is
    rendered as a cosine so real fields interpolate to real values.
    """
    grid = f.grid
    fhat = np.fft.fft(f.values) / grid.point_count
    k = grid.wavenumbers
    ny = grid.nyquist_index
    pts = np.asarray(points, dtype=np.float64)
    shifted = pts + grid.half_length
    idx = np.arange(grid.point_count) != ny
    out = np.exp(1j * np.outer(shifted, k[idx])) @ fhat[idx]
    out = out + fhat[ny] * np.cos(k[ny] * shifted)
    return out


# ---------------------------------------------------------------------------
# Serialization: CSV (x, re, im) and binary snapshots.
# Binary layout: little-endian float64 L, int64 n, then n interleaved
# little-endian float64 pairs (re, im).
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<dq")


def field_to_csv(f: ComplexField, path) -> None:
    data = np.column_stack([f.grid.nodes, f.values.real, f.values.imag])
    np.savetxt(path, data, delimiter=",", header="x,re,im", comments="")


def field_from_csv(path) -> ComplexField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    x = data[:, 0]
    n = x.size
    h = x[1] - x[0]
    L = -x[0]
    if not np.allclose(np.diff(x), h, rtol=0, atol=1e-12 * max(1.0, abs(L))):
        raise ValueError("CSV nodes are not uniformly spaced")
    grid = make_grid(L, n)
    if not np.allclose(grid.nodes, x, rtol=0, atol=1e-9):
        raise ValueError("CSV nodes do not match a [-L, L) grid")
    return ComplexField(grid, data[:, 1] + 1j * data[:, 2])


def write_snapshot(f: ComplexField, path) -> None:
    payload = np.empty(2 * f.grid.point_count, dtype="<f8")
    payload[0::2] = f.values.real
    payload[1::2] = f.values.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.half_length, f.grid.point_count))
        fh.write(payload.tobytes())


def read_snapshot(path) -> ComplexField:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        L, n = _HEADER.unpack(head)
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != 2 * n:
        raise ValueError(f"snapshot payload has {payload.size} floats, expected {2 * n}")
    grid = make_grid(L, int(n))
    return ComplexField(grid, payload[0::2] + 1j * payload[1::2])
