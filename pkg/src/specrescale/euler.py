"""Incompressible Euler (and Navier-Stokes) dynamics in the periodic cube.

Pressure is never formed: the Leray projector applied to the advection term
removes exactly the gradient part that ``-grad p`` would cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroGradient
from .spectral import (
    Grid,
    ModeSet,
    PhysicalField,
    SpectralField,
    k_squared,
    mode_set,
    physical_values,
    spectral_values,
    wavevector,
)

__all__ = [
    "EulerState",
    "EulerModel",
    "leray_project",
    "euler_rhs",
    "vorticity",
    "taylor_scale",
    "max_vorticity_location",
    "taylor_green",
    "divergence_defect",
]

ADVECTION_FORMS = ("convective", "rotational")
TIE_RTOL = 1e-12


@dataclass
class EulerState:
    """Solver state; ``coeffs`` lives in the :class:`ModeSet` layout."""

    grid: Grid
    coeffs: np.ndarray
    time_local: float = 0.0
    viscosity_effective: float = 0.0

    @classmethod
    def from_field(cls, f: SpectralField, time_local: float = 0.0, viscosity: float = 0.0):
        return cls(f.grid, mode_set(f.grid).from_grid(f.coeffs), time_local, viscosity)

    @property
    def field(self) -> SpectralField:
        return SpectralField(self.grid, mode_set(self.grid).to_grid(self.coeffs), True)


def _project(c: np.ndarray, k: list, k2: np.ndarray) -> np.ndarray:
    div = k[0] * c[0] + k[1] * c[1] + k[2] * c[2]
    div = np.divide(div, k2, out=np.zeros_like(div), where=k2 > 0)
    return c - np.stack([ka * div for ka in k])


def _curl(c: np.ndarray, k: list) -> np.ndarray:
    return 1j * np.stack(
        [
            k[1] * c[2] - k[2] * c[1],
            k[2] * c[0] - k[0] * c[2],
            k[0] * c[1] - k[1] * c[0],
        ]
    )


def _grid_k(grid: Grid) -> list:
    return [wavevector(grid, a, derivative=True) for a in range(3)]


def divergence_defect(c: np.ndarray, k: list) -> float:
    """``max_k |k . u_hat(k)| / max |u_hat|``."""
    div = k[0] * c[0] + k[1] * c[1] + k[2] * c[2]
    scale = np.abs(c).max()
    return float(np.abs(div).max() / scale) if scale > 0 else 0.0


def advection_coeffs(c: np.ndarray, modes: ModeSet, form: str = "convective") -> np.ndarray:
    """Dealiased ``(u . grad) u`` (convective) or ``omega x u`` (rotational).

    The two differ by a gradient, so they agree after projection.
    """
    u = modes.to_padded(c)
    k = modes.k
    if form == "convective":
        g = modes.to_padded(np.concatenate([1j * k[i] * c for i in range(3)]))
        prod = u[0] * g[0:3] + u[1] * g[3:6] + u[2] * g[6:9]
    elif form == "rotational":
        w = modes.to_padded(_curl(c, k))
        prod = np.stack(
            [
                w[1] * u[2] - w[2] * u[1],
                w[2] * u[0] - w[0] * u[2],
                w[0] * u[1] - w[1] * u[0],
            ]
        )
    else:
        raise ValueError(f"unknown advection form {form!r}; expected one of {ADVECTION_FORMS}")
    return modes.from_padded(prod)


def euler_rhs_coeffs(
    c: np.ndarray, modes: ModeSet, viscosity: float = 0.0, form: str = "convective"
) -> np.ndarray:
    out = -_project(advection_coeffs(c, modes, form), modes.k, modes.k2)
    if viscosity:
        out -= viscosity * modes.k2 * c
    return out


def leray_project(s: SpectralField) -> SpectralField:
    """Remove the longitudinal part ``k (k . u_hat) / |k|**2`` of every mode.

    On the collocation layout a Nyquist component of ``k`` counts as zero,
    which keeps the projector compatible with Hermitian symmetry.
    """
    g = s.grid
    return SpectralField(g, _project(s.coeffs, _grid_k(g), k_squared(g)), divergence_free=True)


def euler_rhs(s: EulerState, form: str = "convective") -> SpectralField:
    modes = mode_set(s.grid)
    out = euler_rhs_coeffs(s.coeffs, modes, s.viscosity_effective, form)
    return SpectralField(s.grid, modes.to_grid(out), divergence_free=True)


def vorticity(s: EulerState) -> PhysicalField:
    modes = mode_set(s.grid)
    return PhysicalField(s.grid, modes.values(_curl(s.coeffs, modes.k)))


def grid_vorticity(f: SpectralField) -> PhysicalField:
    """Curl of a collocation-layout field, sampled on the grid."""
    return PhysicalField(f.grid, physical_values(_curl(f.coeffs, _grid_k(f.grid)), f.grid))


def taylor_scale_coeffs(c: np.ndarray, modes: ModeSet) -> float:
    energy = modes.energy(c)
    grad = float(np.sum(modes.k2 * modes.weights * np.abs(c) ** 2))
    if grad < 1e-30:
        raise ZeroGradient("integral of |grad u|^2 vanishes")
    return float(np.sqrt(5.0 * energy / grad))


def taylor_scale(s: EulerState) -> float:
    """``sqrt(5 int|u|^2 / int|grad u|^2)``, both integrals by Parseval."""
    return taylor_scale_coeffs(s.coeffs, mode_set(s.grid))


def _peak(values: np.ndarray) -> int:
    flat = values.ravel()
    top = flat.max()
    return int(np.flatnonzero(flat >= top - TIE_RTOL * abs(top))[0])


def max_vorticity_location(w: PhysicalField, mode: str = "component") -> tuple[tuple[int, ...], float]:
    """Grid index and value of the largest vorticity.

    ``mode="component"`` maximises ``|omega_c(x)|`` over points and
    components; ``mode="modulus"`` maximises ``|omega(x)|``.  Ties go to the
    lexicographically smallest index.
    """
    if mode == "component":
        field = np.abs(w.values).max(axis=0)
    elif mode == "modulus":
        field = np.sqrt(np.sum(w.values**2, axis=0))
    else:
        raise ValueError(f"mode must be 'component' or 'modulus', got {mode!r}")
    idx = tuple(int(i) for i in np.unravel_index(_peak(field), field.shape))
    return idx, float(field[idx])


def taylor_green(grid: Grid) -> EulerState:
    if grid.dim != 3:
        raise ValueError("Taylor-Green data needs a 3D grid")
    x1, x2, x3 = grid.mesh()
    u = np.stack(
        [
            np.sin(x1) * np.cos(x2) * np.cos(x3),
            -np.cos(x1) * np.sin(x2) * np.cos(x3),
            np.zeros_like(x1),
        ]
    )
    return EulerState.from_field(SpectralField(grid, spectral_values(u, grid)))


class EulerModel:
    name = "euler"
    components = 3

    def __init__(self, grid: Grid, viscosity: float = 0.0, form: str = "convective"):
        if form not in ADVECTION_FORMS:
            raise ValueError(f"unknown advection form {form!r}")
        self.grid = grid
        self.modes = mode_set(grid)
        self.viscosity = viscosity
        self.form = form

    def rhs(self, c: np.ndarray, t: float) -> np.ndarray:
        return euler_rhs_coeffs(c, self.modes, self.viscosity, self.form)

    def energy_ratio(self, c: np.ndarray) -> float:
        return self.modes.energy_ratio(c)

    def locate_peak(self, c: np.ndarray, mode: str = "component") -> tuple[int, ...]:
        w = PhysicalField(self.grid, self.modes.values(_curl(c, self.modes.k)))
        return max_vorticity_location(w, mode)[0]

    def constrain(self, c: np.ndarray) -> np.ndarray:
        return _project(c, self.modes.k, self.modes.k2)

    def divergence_defect(self, c: np.ndarray) -> float:
        return divergence_defect(c, self.modes.k)

    def sample(self, c: np.ndarray) -> dict:
        both = self.modes.values(np.concatenate([c, _curl(c, self.modes.k)]))
        u, w = both[:3], both[3:]
        try:
            lam = taylor_scale_coeffs(c, self.modes)
        except ZeroGradient:
            lam = np.inf
        return {
            "max_vorticity_component": float(np.abs(w).max()),
            "max_vorticity_modulus": float(np.sqrt(np.sum(w**2, axis=0)).max()),
            "taylor_scale": lam,
            "max_velocity": float(np.sqrt(np.sum(u**2, axis=0)).max()),
            "energy": self.modes.energy(c),
        }
