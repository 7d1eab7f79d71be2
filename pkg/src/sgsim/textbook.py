"""Closed-form textbook and semiclassical baselines."""
from __future__ import annotations

from .core import SimParams, ValidationError


def textbook_trajectory(t: float, m: float, params: SimParams) -> float:
    """Packet centre inside the magnet for spin projection m: AS m t^2 / 2."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    return 0.5 * params.AS * m * t**2


def textbook_drift_position(t_d: float, m: float, params: SimParams) -> float:
    """Packet centre a time t_d after leaving the magnet."""
    if t_d < 0:
        raise ValidationError(f"t_d must be >= 0, got {t_d}")
    return (0.5 + t_d) * params.AS * m


def semiclassical_spin_flip(z0: float) -> float:
    """Small-angle estimate <sin^2 beta> / 2 ~ 1 / (4 z0^2) for the unit Gaussian."""
    if z0 <= 0:
        raise ValidationError(f"z0 must be > 0, got {z0}")
    return 1.0 / (4.0 * z0**2)
