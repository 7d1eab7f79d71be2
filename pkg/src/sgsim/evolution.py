"""Exact propagation: coefficient ODE, RK4 through the magnet, free drift."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import coeffs_to_grid
from .core import GridSpinor, SimParams, SpinorCoeffs, ValidationError, initial_state

NORM_FAIL = 1e-4
TRUNCATION_WARN = 1e-6
LEAKAGE_WARN = 1e-3
EDGE_FRACTION = 0.05
DEFAULT_STRIDE = 20


class IntegrationError(RuntimeError):
    """The RK4 trajectory lost unitarity beyond tolerance."""


class UndefinedDriftError(ValueError):
    """Drift time requested for a field that produces no deflection."""


class _Couplings:
    """Square-root factors of the ladder selection rules for one basis size."""

    def __init__(self, n: int):
        k = np.arange(n, dtype=float)
        # raise2[k] multiplies c[k+2], lower2[k] multiplies c[k-2]
        self.raise2 = np.sqrt((k[:-2] + 1) * (k[:-2] + 2))
        self.lower2 = np.sqrt(k[2:] * (k[2:] - 1))
        self.raise1 = np.sqrt(k[:-1] + 1)
        self.lower1 = np.sqrt(k[1:])
        self.diag = -2.0 * (k[:, None] + k[None, :] + 1)


def _kinetic(c, cp: _Couplings):
    out = cp.diag * c
    out[:-2, :] += cp.raise2[:, None] * c[2:, :]
    out[2:, :] += cp.lower2[:, None] * c[:-2, :]
    out[:, :-2] += cp.raise2[None, :] * c[:, 2:]
    out[:, 2:] += cp.lower2[None, :] * c[:, :-2]
    return out


def _z_shift(c, cp: _Couplings):
    out = np.zeros_like(c)
    out[:, :-1] += cp.raise1[None, :] * c[:, 1:]
    out[:, 1:] += cp.lower1[None, :] * c[:, :-1]
    return out


def _x_shift(c, cp: _Couplings):
    out = np.zeros_like(c)
    out[:-1, :] += cp.raise1[:, None] * c[1:, :]
    out[1:, :] += cp.lower1[:, None] * c[:-1, :]
    return out


def _rhs(t: float, a, b, params: SimParams, cp: _Couplings):
    kin = 0.25j * params.A
    pot = 1j * params.S / (2.0 * math.sqrt(2.0))
    da = kin * _kinetic(a, cp) + pot * _z_shift(a, cp)
    db = kin * _kinetic(b, cp) - pot * _z_shift(b, cp)
    if not params.textbook_mode:
        phase = np.exp(-1j * params.S * params.z0 * t)
        da -= pot * phase * _x_shift(b, cp)
        db -= pot * np.conj(phase) * _x_shift(a, cp)
    return da, db


def ode_rhs(t: float, coeffs: SpinorCoeffs, params: SimParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (da/dt, db/dt) of the coupled coefficient system.

    Indices outside the truncated basis contribute zero. In textbook mode
    the x-coupling between the spin components is dropped.
    """
    if coeffs.n_basis != params.n_basis:
        raise ValidationError(f"coefficients have {coeffs.n_basis} levels, params expect {params.n_basis}")
    return _rhs(t, coeffs.a, coeffs.b, params, _Couplings(params.n_basis))


@dataclass
class EvolutionRecord:
    times: list[float]
    snapshots: list[SpinorCoeffs]
    final: SpinorCoeffs
    norm_drift: float
    warnings: list[str] = field(default_factory=list)
    final_grid: GridSpinor | None = None

    def trajectory(self, params: SimParams) -> list[dict]:
        """Per-snapshot spin populations and <z>, Var_z from the coefficients."""
        Z = _basis_position(params.n_basis)
        rows = []
        for t, snap in zip(self.times, self.snapshots):
            row = {"t": t}
            for label, c in (("up", snap.a), ("down", snap.b)):
                w = float(np.sum(np.abs(c) ** 2))
                row[f"p_{label}"] = w
                if w > 1e-6:
                    zc = c @ Z
                    mean = float(np.real(np.vdot(c, zc))) / w
                    second = float(np.real(np.vdot(zc, zc))) / w
                    row[f"z_{label}"] = mean
                    row[f"varz_{label}"] = second - mean**2
                else:
                    row[f"z_{label}"] = float("nan")
                    row[f"varz_{label}"] = float("nan")
            rows.append(row)
        return rows


def _basis_position(n: int) -> np.ndarray:
    off = np.sqrt(np.arange(1, n) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def _shell_weight(a, b) -> float:
    w = np.abs(a) ** 2 + np.abs(b) ** 2
    return float(w[-2:, :].sum() + w[:-2, -2:].sum())


def evolve_in_magnet(
    initial: SpinorCoeffs,
    params: SimParams,
    snapshot_stride: int = DEFAULT_STRIDE,
    t_end: float = 1.0,
) -> EvolutionRecord:
    """Fixed-step classic RK4 from ``initial.t`` to ``t_end`` (default: magnet exit)."""
    if snapshot_stride < 1:
        raise ValidationError("snapshot_stride must be >= 1")
    norm0 = initial.norm()
    if abs(norm0 - 1.0) > NORM_FAIL:
        raise ValidationError(f"initial state must be normalized, norm = {norm0}")
    span = t_end - initial.t
    n_steps = max(1, int(math.ceil(span / params.dt - 1e-9)))
    h = span / n_steps
    cp = _Couplings(params.n_basis)
    a = np.array(initial.a, dtype=complex)
    b = np.array(initial.b, dtype=complex)
    t0 = initial.t

    times = [t0]
    snapshots = [SpinorCoeffs(a=a.copy(), b=b.copy(), t=t0)]
    drift = 0.0
    worst_shell = _shell_weight(a, b)
    for step in range(n_steps):
        t = t0 + step * h
        k1a, k1b = _rhs(t, a, b, params, cp)
        k2a, k2b = _rhs(t + h / 2, a + h / 2 * k1a, b + h / 2 * k1b, params, cp)
        k3a, k3b = _rhs(t + h / 2, a + h / 2 * k2a, b + h / 2 * k2b, params, cp)
        k4a, k4b = _rhs(t + h, a + h * k3a, b + h * k3b, params, cp)
        a = a + h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a)
        b = b + h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b)
        done = step + 1
        if done % snapshot_stride == 0 or done == n_steps:
            t_now = t0 + done * h
            norm = float(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2))
            drift = max(drift, abs(norm - norm0))
            if drift > NORM_FAIL:
                raise IntegrationError(
                    f"norm drifted by {drift:.3e} at t={t_now:.4f}; reduce dt or enlarge n_basis"
                )
            worst_shell = max(worst_shell, _shell_weight(a, b))
            times.append(t_now)
            snapshots.append(SpinorCoeffs(a=a.copy(), b=b.copy(), t=t_now))

    warnings = []
    if worst_shell > TRUNCATION_WARN:
        warnings.append(f"basis truncation: top two shells reached probability {worst_shell:.3e}; enlarge n_basis")
    return EvolutionRecord(times=times, snapshots=snapshots, final=snapshots[-1], norm_drift=drift, warnings=warnings)


def momentum_grid(state: GridSpinor) -> tuple[np.ndarray, np.ndarray]:
    kx = 2.0 * np.pi * np.fft.fftfreq(state.x.size, state.dx)
    kz = 2.0 * np.pi * np.fft.fftfreq(state.z.size, state.dz)
    return np.meshgrid(kx, kz, indexing="ij")


def edge_probability(state: GridSpinor, fraction: float = EDGE_FRACTION) -> float:
    """Probability within ``fraction`` of the grid half-width from any edge."""
    X, Z = state.mesh()
    mask = (np.abs(X) > (1 - fraction) * -state.x[0]) | (np.abs(Z) > (1 - fraction) * -state.z[0])
    dens = np.abs(state.up) ** 2 + np.abs(state.down) ** 2
    return float(np.sum(dens[mask]) * state.cell_area)


def free_drift(state: GridSpinor, duration: float, params: SimParams) -> GridSpinor:
    """Apply exp(-i (A/2)(p_x^2 + p_z^2) duration) spectrally on the grid."""
    if duration < 0:
        raise ValidationError(f"drift duration must be >= 0, got {duration}")
    if duration == 0:
        return state
    KX, KZ = momentum_grid(state)
    prop = np.exp(-0.5j * params.A * (KX**2 + KZ**2) * duration)
    up = np.fft.ifft2(np.fft.fft2(state.up) * prop)
    down = np.fft.ifft2(np.fft.fft2(state.down) * prop)
    out = state.with_fields(up, down, t=state.t + duration)
    leak = edge_probability(out)
    if leak <= LEAKAGE_WARN:
        return out
    return state.with_fields(
        up, down, t=state.t + duration,
        warnings=(f"drift leakage: {leak:.3e} of the probability reached the grid boundary",),
    )


def drift_time(params: SimParams) -> float:
    """Free flight after the magnet that brings textbook lobes to z = +-z0."""
    if params.AS == 0:
        raise UndefinedDriftError("drift time undefined when A*S = 0")
    return 2.0 * params.z0 / params.AS - 0.5


def run_exact(params: SimParams, m0: float, drift: bool | float = False,
              snapshot_stride: int = DEFAULT_STRIDE) -> EvolutionRecord:
    """Initial Gaussian -> magnet -> optional free drift, grid state attached."""
    record = evolve_in_magnet(initial_state(params, m0), params, snapshot_stride)
    grid = coeffs_to_grid(record.final, params)
    if drift is True:
        grid = free_drift(grid, drift_time(params), params)
    elif drift is not False and drift:
        grid = free_drift(grid, float(drift), params)
    record.final_grid = grid
    record.warnings.extend(w for w in grid.warnings if w not in record.warnings)
    return record
