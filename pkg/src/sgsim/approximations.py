"""Closed-form approximations to the evolution operator, evaluated on the grid.

Every approximation keeps the spin projection along the local field fixed,
so each one is assembled from per-projection envelopes ``g_n(x, z)``:

    <x z; m | Phi; m0> = sum_n d[n, m](beta) g_n(x, z) d[n, m0](beta)

with n = +1/2, -1/2 the eigenvalues of I_B. The states share the physical
phase frame of :func:`sgsim.basis.coeffs_to_grid`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import make_grid
from .core import GridSpinor, SimParams, check_m0
from .evolution import free_drift

PROJECTIONS = (0.5, -0.5)
RHO_FLOOR = 1e-9
_NORM = 1.0 / np.sqrt(np.pi)


@dataclass(frozen=True)
class FieldFrame:
    """Polar coordinates about the field zero at (x, z) = (0, -z0)."""

    rho: np.ndarray
    beta: np.ndarray


def field_frame(x, z, params: SimParams) -> FieldFrame:
    x = np.asarray(x, dtype=float) + 0.0  # folds -0.0 so beta stays in (-pi, pi]
    w = np.asarray(z, dtype=float) + params.z0
    return FieldFrame(rho=np.hypot(w, x), beta=np.arctan2(x, w))


def wigner_d_half(beta) -> np.ndarray:
    """d^{1/2}(beta), rows/columns ordered (+1/2, -1/2).

    Array input gives shape ``(2, 2) + beta.shape``.
    """
    c = np.cos(np.asarray(beta) / 2)
    s = np.sin(np.asarray(beta) / 2)
    return np.array([[c, -s], [s, c]])


def _index(m: float) -> int:
    return 0 if check_m0(m) > 0 else 1


def _assemble(params: SimParams, t: float, m0: float, envelopes, frame: FieldFrame, x) -> GridSpinor:
    d = wigner_d_half(frame.beta)
    j0 = _index(m0)
    comps = []
    for m in PROJECTIONS:
        j = _index(m)
        comps.append(sum(d[i, j] * envelopes[i] * d[i, j0] for i in range(2)))
    return GridSpinor(up=comps[0], down=comps[1], x=x, z=x, t=t)


def _setup(params: SimParams):
    x = make_grid(params)
    X, Z = np.meshgrid(x, x, indexing="ij")
    return x, X, Z, field_frame(X, Z, params)


def _spread_gaussian(X, Z, width_factor: complex):
    # free evolution of the unit Gaussian: denominator 2(1 + i A t)
    return _NORM / width_factor * np.exp(-(X**2 + Z**2) / (2.0 * width_factor))


def adiabatic_wavefunction(params: SimParams, t: float, m0: float) -> GridSpinor:
    """Kinetic energy neglected: the density stays frozen, only phases evolve."""
    x, X, Z, frame = _setup(params)
    gauss = _spread_gaussian(X, Z, 1.0)
    env = [gauss * np.exp(1j * n * frame.rho * params.S * t) for n in PROJECTIONS]
    return _assemble(params, t, m0, env, frame, x)


def pseudo_adiabatic_wavefunction(params: SimParams, t: float, m0: float) -> GridSpinor:
    """Adiabatic phases applied to the freely spread packet."""
    x, X, Z, frame = _setup(params)
    gauss = _spread_gaussian(X, Z, 1.0 + 1j * params.A * t)
    env = [gauss * np.exp(1j * n * frame.rho * params.S * t) for n in PROJECTIONS]
    return _assemble(params, t, m0, env, frame, x)


def coherent_state_wavefunction(params: SimParams, t: float, m0: float) -> GridSpinor:
    """Spread packet whose I_B components are displaced radially by n A S t^2 / 2."""
    x, X, Z, frame = _setup(params)
    A, S, z0 = params.A, params.S, params.z0
    width = 1.0 + 1j * A * t
    rho = np.maximum(frame.rho, RHO_FLOOR)
    cos_b = np.cos(frame.beta)
    global_phase = np.exp(1j * A * S**2 * t**3 / 12.0)
    env = []
    for n in PROJECTIONS:
        rho_n = frame.rho - n * A * S * t**2 / 2.0
        inside = rho_n > 0
        rho_n = np.where(inside, rho_n, 0.0)
        gauss = _NORM / width * np.exp(-(rho_n**2 - 2.0 * rho_n * z0 * cos_b + z0**2) / (2.0 * width))
        amp = np.where(inside, np.sqrt(rho_n / rho) * gauss, 0.0)
        env.append(global_phase * amp * np.exp(1j * n * frame.rho * S * t))
    return _assemble(params, t, m0, env, frame, x)


def symmetrized_inner(params: SimParams, t: float, m0: float) -> GridSpinor:
    """Half-step spread packet with the adiabatic phases, before the outer U_0(t/2)."""
    x, X, Z, frame = _setup(params)
    gauss = _spread_gaussian(X, Z, 1.0 + 0.5j * params.A * t)
    env = [gauss * np.exp(1j * n * frame.rho * params.S * t) for n in PROJECTIONS]
    return _assemble(params, t, m0, env, frame, x)


def symmetrized_wavefunction(params: SimParams, t: float, m0: float) -> GridSpinor:
    """U_0(t/2) exp(i t S rho I_B) U_0(t/2) applied to the initial packet."""
    inner = symmetrized_inner(params, t, m0)
    out = free_drift(inner, 0.5 * t, params)
    phase = np.exp(1j * params.A * params.S**2 * t**3 / 24.0)
    return out.with_fields(phase * out.up, phase * out.down, t=t, warnings=())


def local_frame_components(state: GridSpinor, params: SimParams) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes along the local field, I_B = +1/2 and -1/2, at each grid point."""
    X, Z = state.mesh()
    d = wigner_d_half(field_frame(X, Z, params).beta)
    plus = d[0, 0] * state.up + d[0, 1] * state.down
    minus = d[1, 0] * state.up + d[1, 1] * state.down
    return plus, minus


APPROXIMATIONS = {
    "adiabatic": adiabatic_wavefunction,
    "pseudo_adiabatic": pseudo_adiabatic_wavefunction,
    "coherent_state": coherent_state_wavefunction,
    "symmetrized": symmetrized_wavefunction,
}
