"""Linearized operator around the soliton, its root space, and projections.

The matrix operator (acting on column vectors (u, v)) is

    H = [ dxx - 1 + 3 phi0^4      2 phi0^4        ]
        [ -2 phi0^4              -dxx + 1 - 3 phi0^4 ]

with adjoint H* obtained by flipping the off-diagonal signs.  Its generalized
kernel is six dimensional (geometric multiplicity two), spanned by five
symmetry modes plus one exotic mode built from the solution rho of
L+ rho = x^2 phi0, where

    L- = -dxx + 1 - phi0^4,    L+ = -dxx + 1 - 5 phi0^4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .grids import ComplexField, Grid1D, VectorField, inner, l2_norm
from .solitons import phi0, phi0_prime

__all__ = [
    "HOperator",
    "RootSpaceBasis",
    "LScalarOperators",
    "build_L_operators",
    "solve_rho",
    "build_root_basis",
    "gram_table",
    "expected_gram",
    "project",
    "apply_H",
    "apply_H_star",
    "spectrum_check",
    "SpectrumReport",
]

MIN_HALF_LENGTH = 30.0
DENSE_LIMIT = 2048


def _derivative_multiplier(grid: Grid1D, order: int) -> np.ndarray:
    mult = (1j * grid.wavenumbers) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[grid.nyquist_index] = 0.0
    return mult


def _dxx(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    return np.fft.ifft(_derivative_multiplier(grid, 2) * np.fft.fft(values))


@dataclass(frozen=True)
class LScalarOperators:
    """Matrix-free L- and L+ on a grid (self-adjoint scalar operators)."""

    grid: Grid1D
    potential: np.ndarray  # phi0^4 samples

    def minus(self, f: np.ndarray) -> np.ndarray:
        return -_dxx(self.grid, f) + f - self.potential * f

    def plus(self, f: np.ndarray) -> np.ndarray:
        return -_dxx(self.grid, f) + f - 5.0 * self.potential * f


def build_L_operators(grid: Grid1D) -> LScalarOperators:
    if grid.half_length < MIN_HALF_LENGTH:
        raise ValueError(
            f"grid half-length {grid.half_length} too small to resolve the soliton tails"
            f" (need >= {MIN_HALF_LENGTH})"
        )
    pot = phi0(grid.nodes) ** 4
    return LScalarOperators(grid, pot)


def solve_rho(grid: Grid1D, tol: float = 1e-12) -> ComplexField:
    """Even decaying solution of L+ rho = x^2 phi0.

    The kernel of L+ is spanned by the odd phi0', so evenness fixes rho
    uniquely.  Solved matrix-free with GMRES preconditioned by (-dxx + 1)^(-1);
    parity is enforced by symmetrizing (L+ preserves parity, so this is exact).
    """
    ops = build_L_operators(grid)
    n = grid.point_count
    x = grid.nodes
    rhs = x ** 2 * phi0(x)

    # Parity map on [-L, L): j -> (n - j) mod n fixes x_0 = -L and x_{n/2} = 0.
    flip = (-np.arange(n)) % n

    def symmetrize(f):
        return 0.5 * (f + f[flip])

    rhs = symmetrize(rhs)

    def matvec(f):
        # L+ on the even sector, identity on the odd sector: the odd kernel
        # (phi0') would otherwise stall the Krylov iteration
        even = symmetrize(f)
        return ops.plus(even) + (f - even)

    lin = spla.LinearOperator((n, n), matvec=matvec, dtype=np.complex128)

    free_mult = 1.0 / (grid.wavenumbers ** 2 + 1.0)

    def precond(f):
        return np.fft.ifft(free_mult * np.fft.fft(f))

    prec = spla.LinearOperator((n, n), matvec=precond, dtype=np.complex128)
    sol, info = spla.gmres(lin, rhs.astype(np.complex128), M=prec, rtol=tol, atol=0.0,
                           maxiter=400, restart=60)
    if info != 0:
        raise RuntimeError(f"rho solve failed to converge (gmres info={info})")
    sol = symmetrize(sol.real)
    residual = np.max(np.abs(ops.plus(sol) - rhs))
    if residual > 1e-7 * max(1.0, np.max(np.abs(rhs))):
        raise RuntimeError(f"rho solve residual too large: {residual:.3e}")
    return ComplexField(grid, sol)


@dataclass(frozen=True)
class RootSpaceBasis:
    """The twelve root vectors, the exotic profile rho, and the kappa constants.

    eta[i], xi[i] are 1-indexed via eta(i)/xi(i); kappa1, kappa2 > 0 while the
    sign of kappa3 is reported, not asserted.  rho_at evaluates the exotic
    profile off-grid (cubic spline on a 16x band-limited upsampling, accurate
    to ~1e-10; zero outside the box where rho is below 1e-12 anyway).
    """

    grid: Grid1D
    etas: tuple
    xis: tuple
    rho: ComplexField
    kappa1: float
    kappa2: float
    kappa3: float
    _rho_spline: object = None

    def eta(self, i: int) -> VectorField:
        return self.etas[i - 1]

    def xi(self, i: int) -> VectorField:
        return self.xis[i - 1]

    def rho_at(self, z: np.ndarray) -> np.ndarray:
        zc = np.clip(z, -self.grid.half_length, self.grid.half_length - self.grid.spacing)
        vals = self._rho_spline(zc)
        return np.where(np.abs(z) <= self.grid.half_length - self.grid.spacing, vals, 0.0)


def _upsampled_spline(f: ComplexField, factor: int = 16):
    """Cubic spline through a band-limited upsampling of a real grid field."""
    from scipy.interpolate import CubicSpline

    n = f.grid.point_count
    fhat = np.fft.fft(f.values.real)
    big = np.zeros(factor * n, dtype=np.complex128)
    half = n // 2
    big[:half] = fhat[:half]
    big[-half:] = fhat[-half:]
    # split the Nyquist coefficient symmetrically to keep the signal real
    big[half] = 0.5 * fhat[half]
    big[-half] = big[-half] + 0.5 * fhat[half]
    fine = np.fft.ifft(big).real * factor
    xfine = -f.grid.half_length + (f.grid.spacing / factor) * np.arange(factor * n)
    return CubicSpline(xfine, fine, extrapolate=False)


def _vec(grid: Grid1D, up: np.ndarray, lo: np.ndarray) -> VectorField:
    return VectorField(ComplexField(grid, up), ComplexField(grid, lo))


def build_root_basis(grid: Grid1D, rho: ComplexField | None = None) -> RootSpaceBasis:
    """Sample the root-space bases of H and H* and compute kappa1..kappa3."""
    if rho is None:
        rho = solve_rho(grid)
    x = grid.nodes
    p0 = phi0(x)
    p1 = phi0_prime(x)
    lam0 = x * p1 + 0.5 * p0  # scaling mode
    r = rho.values.real
    h = grid.spacing

    etas = (
        _vec(grid, 1j * p0, -1j * p0),
        _vec(grid, lam0, lam0),
        _vec(grid, p1, p1),
        _vec(grid, 1j * x * p0, -1j * x * p0),
        _vec(grid, 1j * x ** 2 * p0, -1j * x ** 2 * p0),
        _vec(grid, r, r),
    )
    xis = (
        _vec(grid, p0, p0),
        _vec(grid, 1j * lam0, -1j * lam0),
        _vec(grid, 1j * p1, -1j * p1),
        _vec(grid, x * p0, x * p0),
        _vec(grid, x ** 2 * p0, x ** 2 * p0),
        _vec(grid, 1j * r, -1j * r),
    )
    kappa1 = float(h * np.sum(p0 ** 2))
    kappa2 = float(h * np.sum(r * p0))
    kappa3 = float(h * np.sum(x ** 2 * p0 * r))
    if kappa1 <= 0 or kappa2 <= 0:
        raise RuntimeError("kappa1 and kappa2 must be positive; basis is corrupted")
    return RootSpaceBasis(
        grid, etas, xis, rho, kappa1, kappa2, kappa3, _upsampled_spline(rho)
    )


def gram_table(basis: RootSpaceBasis) -> np.ndarray:
    """6x6 matrix G[i][j] = <eta_i, xi_j> (hermitian pairing, 0-indexed array)."""
    g = np.empty((6, 6), dtype=np.complex128)
    for i in range(6):
        for j in range(6):
            g[i, j] = inner(basis.etas[i], basis.xis[j])
    return g


def expected_gram(basis: RootSpaceBasis) -> np.ndarray:
    """The analytic Gram table in terms of kappa1..kappa3."""
    k1, k2, k3 = basis.kappa1, basis.kappa2, basis.kappa3
    g = np.zeros((6, 6))
    g[0, 5] = 2 * k2      # <eta1, xi6>
    g[1, 4] = -4 * k2     # <eta2, xi5>
    g[2, 3] = -k1         # <eta3, xi4>
    g[3, 2] = -k1         # <eta4, xi3>
    g[4, 1] = -4 * k2     # <eta5, xi2>
    g[4, 5] = 2 * k3      # <eta5, xi6>
    g[5, 0] = 2 * k2      # <eta6, xi1>
    g[5, 4] = 2 * k3      # <eta6, xi5>
    return g


def project(f: VectorField, basis: RootSpaceBasis):
    """Split f = sum_i lambda_i eta_i + f_dis with <f_dis, xi_j> = 0 for all j.

    Returns (lambdas, f_dis) where lambdas is a length-6 complex array.
    """
    if f.grid != basis.grid:
        raise ValueError("field and basis on different grids")
    g = gram_table(basis)
    m = np.array([inner(f, xi) for xi in basis.xis])
    try:
        lam = np.linalg.solve(g.T, m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular Gram system: root basis is corrupted") from exc
    up = f.upper.values - sum(l * e.upper.values for l, e in zip(lam, basis.etas))
    lo = f.lower.values - sum(l * e.lower.values for l, e in zip(lam, basis.etas))
    return lam, _vec(basis.grid, up, lo)


@dataclass(frozen=True)
class HOperator:
    """Matrix-free application of H / H*, with dense assembly for small grids."""

    grid: Grid1D
    potential: np.ndarray  # phi0^4

    def apply(self, f: VectorField) -> VectorField:
        return apply_H(self, f)

    def apply_star(self, f: VectorField) -> VectorField:
        return apply_H_star(self, f)

    def matrix(self) -> np.ndarray:
        return _dense_H(self.grid, self.potential, star=False)

    def matrix_star(self) -> np.ndarray:
        return _dense_H(self.grid, self.potential, star=True)


def build_H(grid: Grid1D) -> HOperator:
    return HOperator(grid, phi0(grid.nodes) ** 4)


def apply_H(op: HOperator, f: VectorField) -> VectorField:
    u = f.upper.values
    v = f.lower.values
    pot = op.potential
    up = _dxx(op.grid, u) - u + 3.0 * pot * u + 2.0 * pot * v
    lo = -2.0 * pot * u - _dxx(op.grid, v) + v - 3.0 * pot * v
    return _vec(op.grid, up, lo)


def apply_H_star(op: HOperator, f: VectorField) -> VectorField:
    u = f.upper.values
    v = f.lower.values
    pot = op.potential
    up = _dxx(op.grid, u) - u + 3.0 * pot * u - 2.0 * pot * v
    lo = 2.0 * pot * u - _dxx(op.grid, v) + v - 3.0 * pot * v
    return _vec(op.grid, up, lo)


def _dense_dxx(grid: Grid1D) -> np.ndarray:
    n = grid.point_count
    mult = _derivative_multiplier(grid, 2)
    d2 = np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    return d2.real


def _dense_H(grid: Grid1D, pot: np.ndarray, star: bool) -> np.ndarray:
    n = grid.point_count
    if n > DENSE_LIMIT:
        raise ValueError(f"dense assembly limited to n <= {DENSE_LIMIT}")
    d2 = _dense_dxx(grid)
    eye = np.eye(n)
    a = d2 - eye + 3.0 * np.diag(pot)
    b = 2.0 * np.diag(pot)
    sign = -1.0 if star else 1.0
    top = np.hstack([a, sign * b])
    bottom = np.hstack([-sign * b, -a])
    return np.vstack([top, bottom])


@dataclass(frozen=True)
class SpectrumReport:
    near_zero_count: int
    restricted_rank: int
    spectral_gap_ok: bool
    cluster_threshold: float
    min_noncluster_abs_re: float
    near_zero_eigenvalues: np.ndarray


def spectrum_check(op: HOperator, gap_floor: float = 0.98) -> SpectrumReport:
    """Dense eigen-analysis of the discretized H.

    Counts the near-zero cluster (threshold = geometric mean of the 6th and
    7th smallest |lambda|), computes the rank of H restricted to the cluster's
    invariant subspace via a sorted Schur form, and checks the spectral gap.
    """
    mat = op.matrix()
    eigvals = scipy.linalg.eigvals(mat)
    order = np.argsort(np.abs(eigvals))
    mags = np.abs(eigvals[order])
    eps0 = float(np.sqrt(mags[5] * mags[6]))
    cluster = np.abs(eigvals) < eps0
    count = int(np.sum(cluster))

    def in_cluster(re, im):
        return np.hypot(re, im) < eps0

    tmat, qmat, sdim = scipy.linalg.schur(mat, output="real", sort=in_cluster)
    q6 = qmat[:, :sdim]
    restricted = q6.T @ (mat @ q6)
    svals = scipy.linalg.svdvals(restricted)
    norm_h = float(mags[-1])
    rank = int(np.sum(svals > 1e-6 * norm_h))

    noncluster = eigvals[~cluster]
    min_re = float(np.min(np.abs(noncluster.real))) if noncluster.size else np.inf
    return SpectrumReport(
        near_zero_count=count,
        restricted_rank=rank,
        spectral_gap_ok=bool(min_re >= gap_floor),
        cluster_threshold=eps0,
        min_noncluster_abs_re=min_re,
        near_zero_eigenvalues=eigvals[cluster],
    )
