"""Harmonic-oscillator basis and coefficient <-> grid transforms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .core import GridSpinor, SimParams, SpinorCoeffs, ValidationError

GRID_NORM_WARN = 1e-4
PROJECTION_WARN = 1e-3

_PI_QUARTER = np.pi**-0.25


def ho_table(n_levels: int, x) -> np.ndarray:
    """Values of phi_0 .. phi_{n_levels-1} at ``x``; shape ``(n_levels,) + x.shape``.

    The recurrence runs on the normalized functions, so no factorials or
    raw Hermite polynomials appear and n ~ 100 stays finite.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_levels,) + x.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if n_levels > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(2, n_levels):
        out[k] = np.sqrt(2.0 / k) * x * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out


def ho_eigenfunction(n: int, x):
    """phi_n(x) = (2^n n! sqrt(pi))^(-1/2) H_n(x) exp(-x^2/2)."""
    if n < 0:
        raise ValidationError(f"oscillator level must be >= 0, got {n}")
    values = ho_table(n + 1, x)[n]
    return float(values) if np.ndim(values) == 0 else values


def position_matrix(n_levels: int) -> np.ndarray:
    """<k|x|l> in the truncated basis: sqrt(l/2) on both off-diagonals."""
    off = np.sqrt(np.arange(1, n_levels) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def momentum_squared_matrix(n_levels: int) -> np.ndarray:
    """<k|p^2|l> from p = i(a^dag - a)/sqrt(2), truncated after squaring."""
    k = np.arange(n_levels)
    mat = np.diag(k + 0.5)
    off = -np.sqrt((k[:-2] + 1.0) * (k[:-2] + 2.0)) / 2.0
    return mat + np.diag(off, 2) + np.diag(off, -2)


def lowering_matrix(n_levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1)


@dataclass(frozen=True)
class BasisSpec:
    """Gauss-Hermite rule matched to an oscillator basis.

    ``weights`` integrate ``f(x) exp(-x^2)``; with ``2 n_basis`` nodes the
    rule is exact for polynomial degree < ``4 n_basis``.
    """

    n_basis: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, n_basis: int, n_nodes: int | None = None) -> "BasisSpec":
        n_nodes = 2 * n_basis if n_nodes is None else n_nodes
        if n_nodes < 2 * n_basis:
            raise ValidationError("projection needs at least 2 * n_basis quadrature nodes")
        nodes, weights = hermgauss(n_nodes)
        return cls(n_basis=n_basis, nodes=nodes, weights=weights)

    def table(self) -> np.ndarray:
        return ho_table(self.n_basis, self.nodes)

    def gaussian_weights(self) -> np.ndarray:
        """Weights for plain integrals of Gaussian-decaying integrands."""
        return self.weights * np.exp(self.nodes**2)

    def project(self, f) -> np.ndarray:
        """Coefficients <phi_n|f> of a 1-D callable."""
        return self.table() @ (self.gaussian_weights() * f(self.nodes))

    def project_2d(self, f) -> np.ndarray:
        """Coefficients c[n, m] = <phi_n phi_m | f> of a callable f(x, z)."""
        X, Z = np.meshgrid(self.nodes, self.nodes, indexing="ij")
        w = self.gaussian_weights()
        phi = self.table()
        return phi @ (w[:, None] * f(X, Z) * w[None, :]) @ phi.T


def make_grid(params: SimParams) -> np.ndarray:
    """1-D sample points shared by the x and z axes."""
    n = params.grid_points
    h = 2.0 * params.grid_extent / n
    return -params.grid_extent + h * np.arange(n)


def interaction_phases(t: float, params: SimParams) -> tuple[complex, complex]:
    half = 0.5 * t * params.S * params.z0
    return np.exp(1j * half), np.exp(-1j * half)


def coeffs_to_grid(coeffs: SpinorCoeffs, params: SimParams, x=None) -> GridSpinor:
    """Synthesize the physical spinor on the grid, phases included."""
    if coeffs.n_basis != params.n_basis:
        raise ValidationError(f"coefficients have {coeffs.n_basis} levels, params expect {params.n_basis}")
    x = make_grid(params) if x is None else x
    phi = ho_table(params.n_basis, x)
    up_phase, down_phase = interaction_phases(coeffs.t, params)
    up = up_phase * (phi.T @ coeffs.a @ phi)
    down = down_phase * (phi.T @ coeffs.b @ phi)
    grid = GridSpinor(up=up, down=down, x=x, z=x, t=coeffs.t)
    deficit = coeffs.norm() - grid.norm()
    if abs(deficit) > GRID_NORM_WARN:
        grid = grid.with_fields(up, down, warnings=(f"grid does not contain the state: norm deficit {deficit:.3e}",))
    return grid


def grid_to_coeffs(grid: GridSpinor, params: SimParams) -> SpinorCoeffs:
    """Project a grid spinor onto the basis (trapezoid rule on the grid).

    The residual is the probability the truncated basis fails to capture.
    """
    phi_x = ho_table(params.n_basis, grid.x)
    phi_z = ho_table(params.n_basis, grid.z)
    up_phase, down_phase = interaction_phases(grid.t, params)
    area = grid.cell_area
    a = np.conj(up_phase) * (phi_x @ grid.up @ phi_z.T) * area
    b = np.conj(down_phase) * (phi_x @ grid.down @ phi_z.T) * area
    coeffs = SpinorCoeffs(a=a, b=b, t=grid.t)
    residual = grid.norm() - coeffs.norm()
    warnings = ()
    if residual > PROJECTION_WARN:
        warnings = (f"basis truncation: {residual:.3e} of the probability lies outside the basis",)
    return SpinorCoeffs(a=a, b=b, t=grid.t, residual=float(residual), warnings=warnings)
