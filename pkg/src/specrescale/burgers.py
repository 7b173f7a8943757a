"""Inviscid Burgers equation ``u_t + u u_x = 0`` on the periodic line."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, ModeSet, SpectralField, mode_set, spectral_values

__all__ = [
    "BurgersState",
    "BurgersModel",
    "burgers_rhs",
    "max_gradient_location",
    "cosine_initial",
]

TIE_RTOL = 1e-12


@dataclass
class BurgersState:
    """Solver state; ``coeffs`` lives in the :class:`ModeSet` layout."""

    grid: Grid
    coeffs: np.ndarray
    time_local: float = 0.0

    @classmethod
    def from_field(cls, f: SpectralField, time_local: float = 0.0) -> "BurgersState":
        return cls(f.grid, mode_set(f.grid).from_grid(f.coeffs), time_local)

    @property
    def field(self) -> SpectralField:
        return SpectralField(self.grid, mode_set(self.grid).to_grid(self.coeffs))


def burgers_rhs_coeffs(c: np.ndarray, modes: ModeSet, viscosity: float = 0.0) -> np.ndarray:
    """``-u u_x`` with the product taken on the padded grid."""
    ux = 1j * modes.k[0] * c
    out = -modes.product(c, ux)
    if viscosity:
        out -= viscosity * modes.k2 * c
    return out


def burgers_rhs(s: BurgersState, viscosity: float = 0.0) -> SpectralField:
    modes = mode_set(s.grid)
    return SpectralField(s.grid, modes.to_grid(burgers_rhs_coeffs(s.coeffs, modes, viscosity)))


def gradient_values(c: np.ndarray, modes: ModeSet) -> np.ndarray:
    return modes.values(1j * modes.k[0] * c)[0]


def _argmax_smallest(values: np.ndarray) -> int:
    top = values.max()
    return int(np.flatnonzero(values >= top - TIE_RTOL * abs(top))[0])


def max_gradient_location(s: BurgersState) -> int:
    """Collocation index of the largest ``|u_x|``; ties go to the smallest index."""
    return _argmax_smallest(np.abs(gradient_values(s.coeffs, mode_set(s.grid))))


def cosine_initial(grid: Grid) -> BurgersState:
    if grid.dim != 1:
        raise ValueError("Burgers runs on a 1D grid")
    x = grid.coordinates()
    return BurgersState.from_field(SpectralField(grid, spectral_values(np.cos(x)[np.newaxis], grid)))


class BurgersModel:
    """Cascade hooks for the 1D problem.

    In 1D the focusing point is the maximum of ``|u_x|``, and the
    per-step sample reports that value in both vorticity slots.
    """

    name = "burgers"
    components = 1

    def __init__(self, grid: Grid, viscosity: float = 0.0):
        self.grid = grid
        self.modes = mode_set(grid)
        self.viscosity = viscosity

    def rhs(self, c: np.ndarray, t: float) -> np.ndarray:
        return burgers_rhs_coeffs(c, self.modes, self.viscosity)

    def energy_ratio(self, c: np.ndarray) -> float:
        return self.modes.energy_ratio(c)

    def locate_peak(self, c: np.ndarray, mode: str = "component") -> tuple[int, ...]:
        return (_argmax_smallest(np.abs(gradient_values(c, self.modes))),)

    def constrain(self, c: np.ndarray) -> np.ndarray:
        return c

    def sample(self, c: np.ndarray) -> dict:
        both = self.modes.values(np.concatenate([c, 1j * self.modes.k[0] * c]))
        ux = float(np.abs(both[1]).max())
        energy = self.modes.energy(c)
        dissip = self.modes.energy(1j * self.modes.k[0] * c)
        return {
            "max_vorticity_component": ux,
            "max_vorticity_modulus": ux,
            "taylor_scale": float(np.sqrt(energy / dissip)) if dissip > 0 else np.inf,
            "max_velocity": float(np.abs(both[0]).max()),
            "energy": energy,
        }
