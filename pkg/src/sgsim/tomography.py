"""Polarisation tomography from a detected scatter pattern.

The detected density is linear in the polarisation vector,
P = P0 + (p_x A_x + p_y A_y + p_z A_z) / 2, so p follows from ordinary
least squares over the grid cells.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PolarizationVector, ValidationError
from .observables import RunPair, asymmetry_maps, probability_density

CONDITION_LIMIT = 1e8
NORMALIZED_TOL = 1e-3
BOUND_SLACK = 1e-9


class DegenerateBasisError(ValueError):
    """Asymmetry maps too close to linearly dependent to separate the components."""


@dataclass(frozen=True)
class AsymmetryBasis:
    p0: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray
    cell_area: float = 1.0

    def __post_init__(self):
        for name in ("ax", "ay", "az"):
            if getattr(self, name).shape != self.p0.shape:
                raise ValidationError(f"{name} shape differs from P0 shape {self.p0.shape}")

    @classmethod
    def from_pair(cls, pair: RunPair) -> "AsymmetryBasis":
        ax, ay, az = asymmetry_maps(pair)
        return cls(p0=probability_density(pair), ax=ax, ay=ay, az=az, cell_area=pair.cell_area)

    def maps(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.ax, self.ay, self.az


@dataclass(frozen=True)
class TomographyFit:
    p: PolarizationVector
    residual: float
    condition: float
    scale: float = 1.0
    unphysical: bool = False


def _as_vector(p) -> np.ndarray:
    vec = p.as_array() if isinstance(p, PolarizationVector) else np.asarray(p, dtype=float)
    if vec.shape != (3,):
        raise ValidationError(f"polarisation must have three components, got shape {vec.shape}")
    if np.linalg.norm(vec) > 1 + 1e-12:
        raise ValidationError(f"|p| = {np.linalg.norm(vec):.6f} exceeds 1")
    return vec


def predicted_density(basis: AsymmetryBasis, p) -> np.ndarray:
    px, py, pz = _as_vector(p)
    return basis.p0 + 0.5 * (px * basis.ax + py * basis.ay + pz * basis.az)


def reconstruct_polarization(observed: np.ndarray, basis: AsymmetryBasis,
                             fit_scale: bool | None = None) -> TomographyFit:
    """Least-squares polarisation from an observed density map.

    With ``fit_scale=None`` an overall intensity factor is fitted only when
    ``observed`` does not integrate to one.
    """
    observed = np.asarray(observed, dtype=float)
    if observed.shape != basis.p0.shape:
        raise ValidationError(f"observed map shape {observed.shape} != basis shape {basis.p0.shape}")
    design = np.column_stack([0.5 * m.ravel() for m in basis.maps()])
    gram = design.T @ design
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        col_norms = np.sqrt(np.diag(gram))
        weak = [axis for axis, w in zip("xyz", col_norms) if w <= col_norms.max() * 1e-4]
        raise DegenerateBasisError(
            f"asymmetry basis is degenerate (condition {condition:.3e}); "
            f"no information on p_{', p_'.join(weak) if weak else '?'}"
        )
    if fit_scale is None:
        fit_scale = abs(observed.sum() * basis.cell_area - 1.0) > NORMALIZED_TOL
    target = observed.ravel()
    if fit_scale:
        full = np.column_stack([basis.p0.ravel(), design])
        coef, *_ = np.linalg.lstsq(full, target, rcond=None)
        scale = float(coef[0])
        if scale <= 0:
            raise DegenerateBasisError("fitted intensity scale is not positive")
        p = coef[1:] / scale
        fitted = full @ coef
    else:
        scale = 1.0
        p, *_ = np.linalg.lstsq(design, target - basis.p0.ravel(), rcond=None)
        fitted = basis.p0.ravel() + design @ p
    residual = float(np.sum((target - fitted) ** 2))
    return TomographyFit(
        p=PolarizationVector.from_array(p),
        residual=residual,
        condition=condition,
        scale=scale,
        unphysical=bool(np.linalg.norm(p) > 1.0),
    )
