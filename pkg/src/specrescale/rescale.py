"""Successive rescaling: the moving window of Fourier modes.

One cycle integrates until the outer/inner energy ratio crosses ``epsilon``,
cuts a box around the vorticity peak, blends a fringe band so the box is
periodic, stretches it back onto the full grid and restarts.  The ledger
keeps the bookkeeping that maps every cycle back to the original frame.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CycleDegenerate,
    EmptyInnerShell,
    ExtentTooLarge,
    SizeMismatch,
    StepUnderflow,
)
from .integrate import FEHLBERG45, IntegratorConfig, integrate_until
from .spectral import Grid, PhysicalField, SpectralField, _spread, spectral_values

log = logging.getLogger(__name__)

__all__ = [
    "RescaleParams",
    "RescaleConfig",
    "CycleEntry",
    "CycleLedger",
    "CycleSnapshot",
    "SAMPLE_DTYPE",
    "FRINGE_PROFILES",
    "extract_box",
    "apply_fringe",
    "stretch_respawn",
    "rescale_parameters",
    "run_cascade",
]


def _raised_cosine(xi):
    return 0.5 * (1.0 - np.cos(np.pi * xi))


def _smoothstep(xi):
    return xi * xi * (3.0 - 2.0 * xi)


def _quintic(xi):
    return xi**3 * (10.0 - 15.0 * xi + 6.0 * xi * xi)


FRINGE_PROFILES = {
    "raised_cosine": _raised_cosine,
    "smoothstep": _smoothstep,
    "quintic": _quintic,
}


@dataclass(frozen=True)
class RescaleParams:
    """Change of variables ``x' = alpha x, t' = beta t, u' = gamma u, p' = delta p``."""

    alpha: float = 4 / 3
    beta: float = 4 / 3
    gamma: float = 1.0
    delta: float = 1.0
    reduced_fraction: float = 0.5
    fringe_fraction: float = 0.25

    def __post_init__(self):
        extent = self.reduced_fraction + self.fringe_fraction
        if not np.isclose(self.alpha, 1.0 / extent, rtol=1e-12):
            raise ValueError(f"alpha={self.alpha} inconsistent with box extent {extent}")
        # advection and pressure terms must keep unit coefficients
        if not np.isclose(self.alpha / (self.beta * self.gamma), 1.0, rtol=1e-12):
            raise ValueError("alpha / (beta * gamma) must equal 1")
        if not np.isclose(self.alpha * self.gamma / (self.beta * self.delta), 1.0, rtol=1e-12):
            raise ValueError("alpha * gamma / (beta * delta) must equal 1")

    @property
    def extent(self) -> float:
        return self.reduced_fraction + self.fringe_fraction

    def box_points(self, n: int) -> int:
        m = self.extent * n
        if not np.isclose(m, round(m)) or round(m) % 2:
            raise SizeMismatch(f"box fraction {self.extent} of {n} points is not an even integer")
        return int(round(m))

    def fringe_points(self, n: int) -> int:
        """Fringe samples on each side of the reduced box."""
        f = 0.5 * self.fringe_fraction * n
        if not np.isclose(f, round(f)):
            raise SizeMismatch(f"fringe of {f} points per side is not an integer")
        return int(round(f))

    @property
    def vorticity_factor(self) -> float:
        """Original-frame vorticity per unit of local vorticity, per cycle."""
        return self.alpha / self.gamma


@dataclass(frozen=True)
class RescaleConfig:
    epsilon: float
    max_cycles: int = 45
    vorticity_mode: str = "component"
    fringe_profile: str = "raised_cosine"
    fringe_runtime_forcing: bool = False
    forcing_strength: float = 0.0
    cycle_time_limit: float = 100.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_cycles < 0:
            raise ValueError("max_cycles must be >= 0")
        if self.vorticity_mode not in ("component", "modulus"):
            raise ValueError(f"unknown vorticity_mode {self.vorticity_mode!r}")
        if self.fringe_profile not in FRINGE_PROFILES:
            raise ValueError(f"unknown fringe profile {self.fringe_profile!r}")
        if self.forcing_strength < 0:
            raise ValueError("forcing_strength must be >= 0")
        if not self.cycle_time_limit > 0:
            raise ValueError("cycle_time_limit must be positive")


SAMPLE_DTYPE = np.dtype(
    [
        ("cycle", "i8"),
        ("t_local", "f8"),
        ("dt", "f8"),
        ("t_original", "f8"),
        ("max_vorticity_component", "f8"),
        ("max_vorticity_modulus", "f8"),
        ("taylor_scale", "f8"),
        ("energy_ratio", "f8"),
        ("max_velocity", "f8"),
        ("energy", "f8"),
    ]
)


@dataclass
class CycleEntry:
    cycle: int
    t_local: float
    t_original_start: float
    t_original_increment: float
    steps_accepted: int
    steps_rejected: int
    max_vorticity_local: float
    viscosity: float
    stop_reason: str
    energy_ratio_end: float
    center: tuple[int, ...] | None = None
    # original-frame position of the local origin and the local-to-original length scale
    origin: tuple[float, ...] = ()
    length_scale: float = 1.0
    center_original: tuple[float, ...] | None = None



@dataclass
class CycleLedger:
    params: RescaleParams = field(default_factory=RescaleParams)
    entries: list[CycleEntry] = field(default_factory=list)
    tableau: str = FEHLBERG45.name

    def time_increment(self, cycle: int, t_local: float) -> float:
        return t_local / self.params.beta**cycle

    def vorticity_scale(self, cycle: int) -> float:
        """Factor taking local vorticity of ``cycle`` to the original frame."""
        return self.params.vorticity_factor**cycle

    @property
    def total_time(self) -> float:
        total = 0.0
        for e in self.entries:
            total += e.t_original_increment
        return total

    @property
    def cumulative_times(self) -> np.ndarray:
        return np.cumsum([e.t_original_increment for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class CycleSnapshot:
    cycle_index: int
    before: np.ndarray
    entry: CycleEntry
    samples: np.ndarray
    center: tuple[int, ...] | None = None
    after: np.ndarray | None = None


# -- box surgery ---------------------------------------------------------------


def extract_box(f: PhysicalField, center: tuple[int, ...] | int, params: RescaleParams = RescaleParams()) -> PhysicalField:
    """Samples of the sub-box of side ``extent * 2*pi`` centred on ``center``.

    Indexing wraps periodically.  The result is returned on a grid of
    ``extent * N`` points, i.e. already read as one period of ``[0, 2*pi)``.
    """
    if params.extent >= 1.0:
        raise ExtentTooLarge(f"box extent {params.extent} must be smaller than the domain")
    grid = f.grid
    center = (center,) if np.isscalar(center) else tuple(center)
    if len(center) != grid.dim:
        raise ValueError(f"center {center} does not match a {grid.dim}D grid")
    m = params.box_points(grid.n)
    out = f.values
    for ax, c in enumerate(center):
        idx = (c - m // 2 + np.arange(m)) % grid.n
        out = np.take(out, idx, axis=ax + 1)
    return PhysicalField(Grid(grid.dim, m), out)


def apply_fringe(f: PhysicalField, fringe_points: int, profile: str = "raised_cosine") -> PhysicalField:
    """Blend the outer ``fringe_points`` samples on each side towards a seam value.

    Along every line and axis, the two fringe bands are pulled towards the
    mean ``g`` of the line's end samples with weight ``w(xi)``, where ``xi``
    grows from 0 at the reduced-box edge to 1 at the periodic seam.  Since
    ``w`` has zero slope at both ends the result is periodic and C1; the
    reduced box itself is untouched.  Axes are treated one after another,
    which is the tensor product of the 1D blends.
    """
    w_of = FRINGE_PROFILES[profile]
    m = f.grid.n
    nf = fringe_points
    if nf == 0:
        return PhysicalField(f.grid, f.values.copy())
    if 2 * nf >= m:
        raise SizeMismatch(f"{nf} fringe points per side leave no reduced box in {m}")
    dim = f.grid.dim
    xi_right = (np.arange(nf) + 1.0) / (nf + 0.5)
    w_right = w_of(xi_right)
    w_left = w_right[::-1]
    v = f.values.copy()
    for ax in range(1, dim + 1):
        shape = [1] * (dim + 1)
        shape[ax] = nf
        first = np.take(v, [0], axis=ax)
        last = np.take(v, [m - 1], axis=ax)
        seam = 0.5 * (first + last)
        left = [slice(None)] * (dim + 1)
        right = [slice(None)] * (dim + 1)
        left[ax] = slice(0, nf)
        right[ax] = slice(m - nf, m)
        wl = w_left.reshape(shape)
        wr = w_right.reshape(shape)
        v[tuple(left)] = (1 - wl) * v[tuple(left)] + wl * seam
        v[tuple(right)] = (1 - wr) * v[tuple(right)] + wr * seam
    return PhysicalField(f.grid, v)


def stretch_respawn(f: PhysicalField, params: RescaleParams, target: Grid) -> SpectralField:
    """Read the periodised box as a full period and embed its modes into ``target``.

    New high modes are zero, so the respawned field interpolates the box
    samples exactly.  Velocities are multiplied by ``gamma``.
    """
    m = f.grid.n
    if target.dim != f.grid.dim or m != params.box_points(target.n):
        raise SizeMismatch(f"box of {m} points cannot be stretched onto {target}")
    coeffs = spectral_values(f.values, f.grid)
    for ax in range(1, target.dim + 1):
        coeffs = _spread(coeffs, ax, m, target.n)
    return SpectralField(target, params.gamma * coeffs)


def rescale_parameters(params: RescaleParams, state):
    """Return ``state`` with its viscosity multiplied by ``alpha**2 / beta``.

    Accepts anything carrying ``viscosity_effective`` (a model state) or
    ``viscosity`` (a model); with the default parameters the factor is 4/3.
    """
    factor = params.alpha**2 / params.beta
    if hasattr(state, "viscosity_effective"):
        return replace(state, viscosity_effective=state.viscosity_effective * factor)
    state.viscosity = state.viscosity * factor
    return state


# -- the cascade -------------------------------------------------------------------


def _fringe_mask(grid: Grid, params: RescaleParams, profile: str) -> np.ndarray:
    """Weight in the stretched frame: 0 on the reduced box, 1 at the seam."""
    w_of = FRINGE_PROFILES[profile]
    x = grid.coordinates()
    band = np.pi * params.fringe_fraction / params.extent
    dist = np.maximum(band - x, x - (2 * np.pi - band))
    w1 = w_of(np.clip(dist / band, 0.0, 1.0))
    keep = np.ones(grid.shape)
    for ax in range(grid.dim):
        shape = [1] * grid.dim
        shape[ax] = grid.n
        keep = keep * (1 - w1.reshape(shape))
    return 1 - keep


def _forced_rhs(model, target: np.ndarray, mask: np.ndarray, sigma: float):
    modes = model.modes
    u_target = modes.values(target)

    def rhs(c, t):
        damp = -sigma * mask * (modes.values(c) - u_target)
        forcing = model.constrain(modes.from_grid(spectral_values(damp, model.grid)))
        return model.rhs(c, t) + forcing

    return rhs


def _sample_row(model, c, cycle, t, dt, t_orig, ratio) -> tuple:
    s = model.sample(c)
    return (
        cycle,
        t,
        dt,
        t_orig,
        s["max_vorticity_component"],
        s["max_vorticity_modulus"],
        s["taylor_scale"],
        ratio,
        s["max_velocity"],
        s["energy"],
    )


def run_cascade(
    model,
    initial: np.ndarray,
    cfg: RescaleConfig,
    icfg: IntegratorConfig = IntegratorConfig(),
    params: RescaleParams = RescaleParams(),
    progress=None,
    on_snapshot=None,
) -> tuple[CycleLedger, list[CycleSnapshot]]:
    """Run cycles 0..``max_cycles`` starting from solver coefficients ``initial``.

    ``model`` supplies ``rhs``, ``energy_ratio``, ``locate_peak``,
    ``constrain``, ``sample`` and a mutable ``viscosity``.  A cycle that
    hits ``StepUnderflow`` is restarted immediately; one that reaches
    ``cfg.cycle_time_limit`` without crossing the threshold ends the run.
    ``progress(entry)`` and ``on_snapshot(snapshot)`` fire as each cycle
    completes.
    """
    model = copy.copy(model)
    grid = model.grid
    modes = model.modes
    h = grid.spacing
    nbox = params.box_points(grid.n)
    nf = params.fringe_points(grid.n)
    mask = _fringe_mask(grid, params, cfg.fringe_profile) if cfg.fringe_runtime_forcing else None

    ledger = CycleLedger(params)
    snapshots: list[CycleSnapshot] = []
    c = model.constrain(np.array(initial, dtype=complex))
    origin = np.zeros(grid.dim)
    scale = 1.0
    t_orig = 0.0

    def ratio_of(y):
        try:
            return model.energy_ratio(y)
        except EmptyInnerShell:
            return 0.0

    for cycle in range(cfg.max_cycles + 1):
        tfac = params.beta**cycle
        rows = [_sample_row(model, c, cycle, 0.0, 0.0, t_orig, ratio_of(c))]
        warned = False

        def on_step(y, t, dt):
            nonlocal warned
            row = _sample_row(model, y, cycle, t, dt, t_orig + t / tfac, ratio_of(y))
            rows.append(row)
            if not warned and row[6] < 2 * h:
                log.warning("cycle %d: Taylor scale %.3g below twice the grid spacing", cycle, row[6])
                warned = True

        rhs = model.rhs
        if mask is not None and cfg.forcing_strength > 0 and cycle > 0:
            rhs = _forced_rhs(model, c, mask, cfg.forcing_strength)
        try:
            res = integrate_until(
                c, rhs, icfg,
                stop=lambda y, t: ratio_of(y) >= cfg.epsilon,
                t_max=cfg.cycle_time_limit,
                on_step=on_step,
            )
            reason = "threshold" if res.stopped else "time_limit"
        except StepUnderflow as exc:
            res = exc.result
            reason = "underflow"
            log.warning("cycle %d: %s; forcing a restart", cycle, exc)

        c_end = res.state
        samples = np.array(rows, dtype=SAMPLE_DTYPE)
        n_acc = sum(s.accepted for s in res.steps)
        entry = CycleEntry(
            cycle=cycle,
            t_local=res.t,
            t_original_start=t_orig,
            t_original_increment=ledger.time_increment(cycle, res.t),
            steps_accepted=n_acc,
            steps_rejected=len(res.steps) - n_acc,
            max_vorticity_local=float(samples["max_vorticity_component"].max()),
            viscosity=model.viscosity,
            stop_reason=reason,
            energy_ratio_end=ratio_of(c_end),
            origin=tuple(float(o) for o in origin),
            length_scale=scale,
        )
        ledger.entries.append(entry)
        t_orig = t_orig + entry.t_original_increment
        if progress is not None:
            progress(entry)

        if cycle == cfg.max_cycles or reason == "time_limit":
            snapshots.append(CycleSnapshot(cycle, c_end, entry, samples))
            if on_snapshot is not None:
                on_snapshot(snapshots[-1])
            break

        center = model.locate_peak(c_end, cfg.vorticity_mode)
        entry.center = tuple(int(i) for i in center)
        entry.center_original = tuple(
            float((origin[a] + scale * center[a] * h) % (2 * np.pi)) for a in range(grid.dim)
        )
        phys = PhysicalField(grid, modes.values(c_end))
        box = extract_box(phys, center, params)
        if np.mean(box.values**2) < 1e-30:
            raise CycleDegenerate(f"cycle {cycle}: extracted box carries no energy")
        box = apply_fringe(box, nf, cfg.fringe_profile)
        respawned = stretch_respawn(box, params, grid)
        c_new = model.constrain(modes.from_grid(respawned.coeffs))
        snapshots.append(CycleSnapshot(cycle, c_end, entry, samples, entry.center, c_new))
        if on_snapshot is not None:
            on_snapshot(snapshots[-1])

        start = np.array([(ci - nbox // 2) * h for ci in center])
        origin = origin + scale * start
        scale = scale / params.alpha
        rescale_parameters(params, model)
        c = c_new

    return ledger, snapshots
