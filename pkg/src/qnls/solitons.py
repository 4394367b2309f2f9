"""Closed-form solitons, the symmetry group, and explicit blow-up solutions.

Everything here concerns i psi_t + psi_xx = -|psi|^4 psi.  The ground state
used throughout is the positive even solution of phi'' - alpha*phi + phi^5 = 0,

    phi0(x, alpha) = (3*alpha)**(1/4) / cosh(2*sqrt(alpha)*x)**(1/2),

which is the profile consistent with the linearized-operator chain
(L- phi0 = 0, L+ (phi0/2 + x phi0') = -2 phi0) and with zero energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import ComplexField, Grid1D, spectral_derivative

__all__ = [
    "SL2Params",
    "GalileiParams",
    "StandingWaveParams",
    "phi0",
    "phi0_prime",
    "standing_wave",
    "standing_wave_fn",
    "galilei_apply",
    "sl2_apply",
    "explicit_blowup",
    "exact_modulated_w",
    "pde_residual",
]

_AMP = 3.0 ** 0.25  # phi0(0, 1)


@dataclass(frozen=True)
class SL2Params:
    """Matrix (a, b; c, d) with det = 1, acting by the pseudo-conformal map."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValueError(f"SL(2,R) determinant is {det}, expected 1")

    def scale(self, t: float) -> float:
        """a + b*t; positive on the allowed time range."""
        return self.a + self.b * t


@dataclass(frozen=True)
class GalileiParams:
    gamma: float  # phase
    v: float      # velocity
    mu0: float    # initial position shift

    def __post_init__(self):
        if not all(np.isfinite([self.gamma, self.v, self.mu0])):
            raise ValueError("Galilei parameters must be finite")


@dataclass(frozen=True)
class StandingWaveParams:
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ValueError("alpha must be positive")


def _sech_half(y):
    """sech(y)^{1/2}, overflow-safe for large |y|."""
    ay = np.abs(y)
    return np.sqrt(2.0) * np.exp(-ay / 2.0) / np.sqrt(1.0 + np.exp(-2.0 * ay))


def phi0(x, alpha: float = 1.0):
    """Ground-state profile (3 alpha)^{1/4} sech^{1/2}(2 sqrt(alpha) x)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=np.float64)
    root = np.sqrt(alpha)
    return (3.0 * alpha) ** 0.25 * _sech_half(2.0 * root * x)


def phi0_prime(x, alpha: float = 1.0):
    """d/dx of phi0; closed form -sqrt(alpha) * tanh(2 sqrt(alpha) x) * phi0."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=np.float64)
    root = np.sqrt(alpha)
    return -root * np.tanh(2.0 * root * x) * phi0(x, alpha)


def standing_wave(t: float, alpha: float, grid: Grid1D) -> ComplexField:
    """Samples of e^{i alpha t} phi0(x, alpha)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return ComplexField(grid, np.exp(1j * alpha * t) * phi0(grid.nodes, alpha))


def standing_wave_fn(alpha: float = 1.0) -> Callable[[float, np.ndarray], np.ndarray]:
    """The standing wave as a spacetime-evaluable function psi(t, x)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def psi(t, x):
        return np.exp(1j * alpha * t) * phi0(x, alpha)

    return psi


def galilei_apply(
    psi: Callable[[float, np.ndarray], np.ndarray],
    g: GalileiParams,
    t: float,
    grid: Grid1D,
) -> ComplexField:
    """Boosted/shifted/rephased field e^{i(gamma + v x - v^2 t)} psi(t, x - 2tv - mu0)."""
    x = grid.nodes
    phase = np.exp(1j * (g.gamma + g.v * x - g.v ** 2 * t))
    return ComplexField(grid, phase * psi(t, x - 2.0 * t * g.v - g.mu0))


def sl2_apply(
    psi: Callable[[float, np.ndarray], np.ndarray],
    m: SL2Params,
    t: float,
    grid: Grid1D,
) -> ComplexField:
    """Pseudo-conformal image

        (a+bt)^{-1/2} e^{i b x^2 / 4(a+bt)} psi((c+dt)/(a+bt), x/(a+bt)).

    Only the branch a+bt > 0 is supported; a+bt = 0 is the blow-up time.
    """
    s = m.scale(t)
    if s == 0:
        raise ValueError("evaluation at blow-up time (a + b t = 0)")
    if s < 0:
        raise ValueError("a + b t must stay positive (branch choice)")
    x = grid.nodes
    phase = np.exp(1j * m.b * x ** 2 / (4.0 * s))
    return ComplexField(grid, s ** -0.5 * phase * psi((m.c + m.d * t) / s, x / s))


def explicit_blowup(t: float, grid: Grid1D, m: SL2Params) -> ComplexField:
    """The closed-form blowing-up solution

        f(t,x) = (a+bt)^{-1/2} e^{i(c+dt)/(a+bt)} e^{i b x^2/4(a+bt)} phi0(x/(a+bt))

    which is the pseudo-conformal image of the standing wave and blows up at
    t = -a/b.
    """
    s = m.scale(t)
    if s == 0:
        raise ValueError("evaluation at blow-up time (a + b t = 0)")
    if s < 0:
        raise ValueError("a + b t must stay positive (branch choice)")
    x = grid.nodes
    phase = np.exp(1j * ((m.c + m.d * t) / s + m.b * x ** 2 / (4.0 * s)))
    return ComplexField(grid, s ** -0.5 * phase * phi0(x / s))


def exact_modulated_w(
    t: float,
    grid: Grid1D,
    a: float,
    b: float,
    v: float,
    gamma0: float = 0.0,
    mu0: float = 0.0,
) -> ComplexField:
    """Exact drifting-soliton solution in modulation form.

    Parameters follow the closed-form family

        lambda = (a+bt)^{-1},  beta = -b(a+bt),  omega = v(a+bt),
        mu = 2tv + mu0,        gamma = -1/(b(a+bt)) + v^2 t + gamma0,

    with W = e^{i Psi} sqrt(lambda) phi0(lambda (x - mu)) and
    Psi = gamma + omega z - (beta/4) z^2, z = lambda (x - mu).
    """
    if b == 0:
        raise ValueError("b must be nonzero for the modulated family")
    s = a + b * t
    if s == 0:
        raise ValueError("evaluation at blow-up time (a + b t = 0)")
    if s < 0:
        raise ValueError("a + b t must stay positive (branch choice)")
    lam = 1.0 / s
    beta = -b * s
    omega = v * s
    mu = 2.0 * t * v + mu0
    gamma = -1.0 / (b * s) + v ** 2 * t + gamma0
    z = lam * (grid.nodes - mu)
    psi_phase = gamma + omega * z - 0.25 * beta * z ** 2
    return ComplexField(grid, np.exp(1j * psi_phase) * np.sqrt(lam) * phi0(z))


def pde_residual(
    psi_prev: ComplexField,
    psi_mid: ComplexField,
    psi_next: ComplexField,
    delta: float,
) -> float:
    """Max-norm residual of i psi_t + psi_xx + |psi|^4 psi on three time slices.

    The time derivative is the centered difference over spacing delta; the
    space derivative is spectral.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if psi_prev.grid != psi_mid.grid or psi_mid.grid != psi_next.grid:
        raise ValueError("snapshots on different grids")
    dt_psi = (psi_next.values - psi_prev.values) / (2.0 * delta)
    dxx = spectral_derivative(psi_mid, 2).values
    mid = psi_mid.values
    res = 1j * dt_psi + dxx + np.abs(mid) ** 4 * mid
    return float(np.max(np.abs(res)))
