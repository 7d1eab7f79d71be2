"""Domain types, parameter validation and the initial spinor state."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a documented constraint."""


class FrameMismatchError(ValueError):
    """Raised when two spinor fields do not share time and grid geometry."""


DEFAULT_N_BASIS = 40
DEFAULT_DT = 1e-3
DEFAULT_GRID_POINTS = 256

SPIN_UP = 0.5
SPIN_DOWN = -0.5


def check_m0(m0: float) -> float:
    if m0 not in (SPIN_UP, SPIN_DOWN):
        raise ValidationError(f"m0 must be +1/2 or -1/2, got {m0!r}")
    return float(m0)


@dataclass(frozen=True)
class SimParams:
    """Dimensionless problem definition plus numerical resolution.

    ``A`` is the adiabaticity, ``S`` the separation and ``z0`` the distance
    from the beam centre to the field zero, all in units of the packet
    width and the transit time. ``grid_extent`` is the half-width of the
    square (x, z) grid; ``None`` selects ``max(3 z0, 12)``.
    """

    A: float
    S: float
    z0: float
    n_basis: int = DEFAULT_N_BASIS
    grid_extent: float | None = None
    grid_points: int = DEFAULT_GRID_POINTS
    dt: float = DEFAULT_DT
    textbook_mode: bool = False

    def __post_init__(self):
        for name in ("A", "S", "z0", "dt"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"{name} must be a finite number, got {value!r}")
        if self.A < 0:
            raise ValidationError(f"A must be >= 0, got {self.A}")
        if self.S < 0:
            raise ValidationError(f"S must be >= 0, got {self.S}")
        if self.z0 <= 0:
            raise ValidationError(f"z0 must be > 0, got {self.z0}")
        if self.dt <= 0 or self.dt > 1:
            raise ValidationError(f"dt must lie in (0, 1], got {self.dt}")
        if int(self.n_basis) != self.n_basis or self.n_basis < 2:
            raise ValidationError(f"n_basis must be an integer >= 2, got {self.n_basis}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 16:
            raise ValidationError(f"grid_points must be an integer >= 16, got {self.grid_points}")
        if self.grid_points % 2:
            raise ValidationError("grid_points must be even so that x = 0 is a grid line")
        if self.grid_extent is None:
            object.__setattr__(self, "grid_extent", float(max(3.0 * self.z0, 12.0)))
        if self.grid_extent <= self.required_extent():
            raise ValidationError(
                f"grid_extent={self.grid_extent} must exceed {self.required_extent():.4g} "
                "so that the drifted packets stay on the grid"
            )

    @property
    def AS(self) -> float:
        return self.A * self.S

    def required_extent(self) -> float:
        # z0 + (A S / 2)(1 + t_d), t_d = 2 z0 / (A S) - 1/2
        if self.AS == 0:
            return self.z0
        t_d = 2.0 * self.z0 / self.AS - 0.5
        return self.z0 + 0.5 * self.AS * (1.0 + max(t_d, 0.0))

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(1.0 / self.dt - 1e-9)))

    def replace(self, **changes) -> "SimParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if "z0" in changes and "grid_extent" not in changes:
            values["grid_extent"] = None
        values.update(changes)
        return SimParams(**values)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional inputs: mass, moment, field, gradient, width, length, speed."""

    M: float
    mu: float
    B0: float
    B1: float
    sigma: float
    L: float
    v_y: float

    def __post_init__(self):
        for name in ("M", "mu", "B0", "B1", "sigma", "L", "v_y"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be strictly positive, got {value!r}")

    @property
    def tau(self) -> float:
        return self.L / self.v_y


def params_from_physical(phys: PhysicalParams, hbar: float, **numerics) -> SimParams:
    """Reduce dimensional parameters to (A, S, z0).

    Extra keyword arguments are forwarded to :class:`SimParams` (basis size,
    grid, time step).
    """
    if not (math.isfinite(hbar) and hbar > 0):
        raise ValidationError(f"hbar must be strictly positive, got {hbar!r}")
    tau = phys.tau
    A = hbar * tau / (phys.M * phys.sigma**2)
    S = phys.mu * phys.B1 * tau * phys.sigma / hbar
    z0 = phys.B0 / (phys.sigma * phys.B1)
    return SimParams(A=A, S=S, z0=z0, **numerics)


@dataclass(frozen=True)
class SpinorCoeffs:
    """Oscillator-basis coefficients of the two spin components.

    ``a[n, m]`` multiplies phi_n(x) phi_m(z) in the m=+1/2 component and
    ``b[n, m]`` the same product in the m=-1/2 component. The coefficients
    are stored without the interaction-picture phases exp(+-i t S z0 / 2).
    """

    a: np.ndarray
    b: np.ndarray
    t: float = 0.0
    residual: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.a.shape != self.b.shape or self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise ValidationError(f"coefficient matrices must be square and equal, got {self.a.shape}, {self.b.shape}")

    @property
    def n_basis(self) -> int:
        return self.a.shape[0]

    def norm(self) -> float:
        return float(np.sum(np.abs(self.a) ** 2) + np.sum(np.abs(self.b) ** 2))

    def populations(self) -> tuple[float, float]:
        return float(np.sum(np.abs(self.a) ** 2)), float(np.sum(np.abs(self.b) ** 2))

    def stacked(self) -> np.ndarray:
        return np.stack([self.a, self.b])


@dataclass(frozen=True)
class GridSpinor:
    """Physical spinor amplitudes sampled on a uniform square (x, z) grid.

    Arrays are indexed ``[ix, iz]``. The grid is periodic-compatible:
    ``x[j] = -extent + j * spacing`` with ``spacing = 2 extent / points``.
    """

    up: np.ndarray
    down: np.ndarray
    x: np.ndarray
    z: np.ndarray
    t: float = 0.0
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        shape = (self.x.size, self.z.size)
        if self.up.shape != shape or self.down.shape != shape:
            raise ValidationError(f"field shapes {self.up.shape}, {self.down.shape} do not match grid {shape}")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def cell_area(self) -> float:
        return self.dx * self.dz

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.z, indexing="ij")

    def component(self, m: float) -> np.ndarray:
        return self.up if check_m0(m) > 0 else self.down

    def norm(self) -> float:
        return float((np.sum(np.abs(self.up) ** 2) + np.sum(np.abs(self.down) ** 2)) * self.cell_area)

    def same_geometry(self, other: "GridSpinor") -> bool:
        return (
            self.x.shape == other.x.shape
            and self.z.shape == other.z.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def with_fields(self, up, down, *, t=None, warnings=()) -> "GridSpinor":
        return GridSpinor(
            up=up,
            down=down,
            x=self.x,
            z=self.z,
            t=self.t if t is None else t,
            warnings=tuple(self.warnings) + tuple(warnings),
        )


@dataclass(frozen=True)
class PolarizationVector:
    p_x: float
    p_y: float
    p_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_x, self.p_y, self.p_z], dtype=float)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    @classmethod
    def from_array(cls, p) -> "PolarizationVector":
        p = np.asarray(p, dtype=float)
        return cls(float(p[0]), float(p[1]), float(p[2]))


def initial_state(params: SimParams, m0: float) -> SpinorCoeffs:
    """Ground-state Gaussian with spin projection ``m0`` along z."""
    m0 = check_m0(m0)
    n = params.n_basis
    a = np.zeros((n, n), dtype=complex)
    b = np.zeros((n, n), dtype=complex)
    (a if m0 > 0 else b)[0, 0] = 1.0
    return SpinorCoeffs(a=a, b=b, t=0.0)
