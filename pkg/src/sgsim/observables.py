"""Densities, spin flip, focusing moments, overlaps and asymmetry maps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FrameMismatchError, GridSpinor, ValidationError, check_m0

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
MIN_COMPONENT = 1e-6
PAIR_NORM_TOL = 1e-4


@dataclass(frozen=True)
class RunPair:
    """Final states of the m0 = +1/2 and m0 = -1/2 runs on a common grid and time."""

    plus: GridSpinor
    minus: GridSpinor

    def __post_init__(self):
        if not self.plus.same_geometry(self.minus):
            raise FrameMismatchError("runs do not share a grid")
        if not np.isclose(self.plus.t, self.minus.t, rtol=0, atol=1e-12):
            raise FrameMismatchError(f"runs are at different times: {self.plus.t} vs {self.minus.t}")

    def check_norms(self, tol: float = PAIR_NORM_TOL):
        for label, state in (("+1/2", self.plus), ("-1/2", self.minus)):
            if abs(state.norm() - 1) > tol:
                raise ValidationError(f"m0={label} run has norm {state.norm():.6f}")
        return self

    def states(self) -> tuple[GridSpinor, GridSpinor]:
        return self.plus, self.minus

    @property
    def x(self):
        return self.plus.x

    @property
    def z(self):
        return self.plus.z

    @property
    def cell_area(self) -> float:
        return self.plus.cell_area


@dataclass(frozen=True)
class Moments:
    probability: float
    mean_x: float
    mean_z: float
    var_x: float
    var_z: float


@dataclass
class ObservableReport:
    p0: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray
    flip_plus_to_minus: float
    flip_minus_to_plus: float
    moments: dict = field(default_factory=dict)
    overlap_deficits: dict = field(default_factory=dict)

    def scalars(self) -> dict:
        def as_dict(m):
            return None if m is None else m.__dict__.copy()

        return {
            "flip_plus_to_minus": self.flip_plus_to_minus,
            "flip_minus_to_plus": self.flip_minus_to_plus,
            "moments": {run: {c: as_dict(m) for c, m in comps.items()} for run, comps in self.moments.items()},
            "overlap_deficits": dict(self.overlap_deficits),
        }


def probability_density(pair: RunPair) -> np.ndarray:
    """Detection density of an unpolarised beam."""
    total = sum(np.abs(s.up) ** 2 + np.abs(s.down) ** 2 for s in pair.states())
    return 0.5 * total


def spin_flip_density(final: GridSpinor, m0: float) -> np.ndarray:
    return np.abs(final.component(-check_m0(m0))) ** 2


def spin_flip_probability(final: GridSpinor, m0: float) -> float:
    return float(np.sum(spin_flip_density(final, m0)) * final.cell_area)


def density_moments(density: np.ndarray, x, z, cell_area: float) -> Moments | None:
    weight = float(np.sum(density))
    prob = weight * cell_area
    if prob < MIN_COMPONENT:
        return None
    X, Z = np.meshgrid(x, z, indexing="ij")
    mx = float(np.sum(density * X)) / weight
    mz = float(np.sum(density * Z)) / weight
    vx = float(np.sum(density * (X - mx) ** 2)) / weight
    vz = float(np.sum(density * (Z - mz) ** 2)) / weight
    return Moments(probability=prob, mean_x=mx, mean_z=mz, var_x=vx, var_z=vz)


def component_moments(final: GridSpinor) -> dict[str, Moments | None]:
    """<x>, <z>, Var_x, Var_z of each spin component; None below 1e-6 probability."""
    return {
        label: density_moments(np.abs(comp) ** 2, final.x, final.z, final.cell_area)
        for label, comp in (("up", final.up), ("down", final.down))
    }


def lobe_moments(density: np.ndarray, x, z, cell_area: float) -> dict[str, Moments | None]:
    """Moments of the upper (z > 0) and lower (z < 0) halves of a density map."""
    Z = np.broadcast_to(np.asarray(z)[None, :], density.shape)
    return {
        "upper": density_moments(np.where(Z > 0, density, 0.0), x, z, cell_area),
        "lower": density_moments(np.where(Z < 0, density, 0.0), x, z, cell_area),
    }


def inner_product(left: GridSpinor, right: GridSpinor) -> complex:
    if not left.same_geometry(right):
        raise FrameMismatchError("states do not share a grid")
    return complex(np.vdot(left.up, right.up) + np.vdot(left.down, right.down)) * left.cell_area


def overlap(exact: RunPair, approx: RunPair) -> float:
    """O = |sum_m0 <exact; m0 | approx; m0>| / 2, blind to one global phase."""
    if not np.isclose(exact.plus.t, approx.plus.t, rtol=0, atol=1e-12):
        raise FrameMismatchError(f"exact at t={exact.plus.t}, approximation at t={approx.plus.t}")
    total = sum(inner_product(e, a) for e, a in zip(exact.states(), approx.states()))
    return 0.5 * abs(total)


def asymmetry_maps(pair: RunPair) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A_x, A_y, A_z from the complex amplitudes of the two coherent runs."""
    # cross[m0, m0'] = sum_m psi_m^{m0} conj(psi_m^{m0'})
    states = pair.states()
    cross = [[s.up * np.conj(r.up) + s.down * np.conj(r.down) for r in states] for s in states]
    maps = []
    for axis in ("x", "y", "z"):
        sigma = PAULI[axis]
        total = sum(cross[i][j] * sigma[i, j] for i in range(2) for j in range(2) if sigma[i, j] != 0)
        maps.append(np.real(total))
    return tuple(maps)


def textbook_asymmetry(p0: np.ndarray, z) -> np.ndarray:
    """A_z = +2 P0 above the z = 0 line, -2 P0 below, 0 on it."""
    sign = np.sign(np.broadcast_to(np.asarray(z)[None, :], p0.shape))
    return 2.0 * sign * p0


def build_report(pair: RunPair, approximations: dict[str, RunPair] | None = None) -> ObservableReport:
    ax, ay, az = asymmetry_maps(pair)
    deficits = {}
    for name, approx in (approximations or {}).items():
        deficits[name] = 1.0 - overlap(pair, approx)
    return ObservableReport(
        p0=probability_density(pair),
        ax=ax,
        ay=ay,
        az=az,
        flip_plus_to_minus=spin_flip_probability(pair.plus, 0.5),
        flip_minus_to_plus=spin_flip_probability(pair.minus, -0.5),
        moments={"plus": component_moments(pair.plus), "minus": component_moments(pair.minus)},
        overlap_deficits=deficits,
    )
