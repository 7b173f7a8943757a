"""Structure functions, power-law fits and blow-up diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .errors import (
    EmptySeries,
    InconsistentTables,
    InsufficientPoints,
    NonGridSeparation,
    NonPositiveValues,
)
from .spectral import PhysicalField

__all__ = [
    "StructureFunctionTable",
    "FitResult",
    "BlowupFit",
    "structure_function_1d",
    "structure_function_3d",
    "translate_to_original_scale",
    "average_over_cycles",
    "fit_power_law",
    "core_range",
    "bkm_integral",
    "original_frame_series",
    "fit_blowup_exponent",
]

FLAVORS = ("scalar-axis", "longitudinal", "transverse")
MIN_FIT_POINTS = 5


@dataclass
class StructureFunctionTable:
    order: int
    r: np.ndarray
    values: np.ndarray
    variance: np.ndarray | None = None
    cycle: int | str = 0
    frame: str = "local"
    flavor: str = "scalar-axis"
    cycles_used: tuple[int, ...] = ()

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.variance is None:
            self.variance = np.zeros_like(self.values)


@dataclass
class FitResult:
    slope: float
    intercept: float
    slope_stderr: float
    fit_range: tuple[float, float]
    n_points: int
    sign: int = 1


@dataclass
class BlowupFit:
    T_est: float
    zeta: float
    zeta_stderr: float
    intercept: float
    points_used: int


def _shifts(r_values, spacing: float) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r_values, dtype=float))
    j = np.rint(r / spacing)
    if np.any(np.abs(r - j * spacing) > 1e-9 * max(1.0, spacing)):
        raise NonGridSeparation("separations must be integer multiples of the grid spacing")
    return j.astype(int)


def structure_function_1d(
    f: PhysicalField, n: int, r_values, window: tuple[int, int] | None = None
) -> StructureFunctionTable:
    """``S_n(r) = mean_j (u(x_j + r) - u(x_j))**n`` on the periodic grid.

    ``window=(center, half_width)`` restricts the average to base points
    within ``half_width`` samples of ``center``.
    """
    u = f.values[0]
    shifts = _shifts(r_values, f.grid.spacing)
    if window is None:
        base = np.arange(u.size)
    else:
        c, hw = window
        base = (c + np.arange(-hw, hw + 1)) % u.size
    out = np.empty(len(shifts))
    for i, j in enumerate(shifts):
        du = u[(base + j) % u.size] - u[base]
        out[i] = np.mean(du**n)
    return StructureFunctionTable(n, shifts * f.grid.spacing, out)


def _axis_increments(u: np.ndarray, axis: int, j: int) -> np.ndarray:
    return np.roll(u, -j, axis=axis + 1) - u


def structure_function_3d(
    f: PhysicalField, n: int, r_values, flavor: str = "scalar-axis"
) -> StructureFunctionTable:
    """Axis-aligned structure functions averaged over the three directions.

    For a shift along ``e_a``: ``longitudinal`` uses component ``a``,
    ``transverse`` averages the two other components, ``scalar-axis``
    averages all three.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    u = f.values
    shifts = _shifts(r_values, f.grid.spacing)
    out = np.zeros(len(shifts))
    for i, j in enumerate(shifts):
        acc = 0.0
        for a in range(3):
            du = _axis_increments(u, a, j)
            per_comp = np.mean(du**n, axis=(1, 2, 3))
            if flavor == "longitudinal":
                acc += per_comp[a]
            elif flavor == "transverse":
                acc += 0.5 * (per_comp.sum() - per_comp[a])
            else:
                acc += per_comp.mean()
        out[i] = acc / 3.0
    return StructureFunctionTable(n, shifts * f.grid.spacing, out, flavor=flavor)


def translate_to_original_scale(
    t: StructureFunctionTable, cycle: int, alpha: float = 4 / 3
) -> StructureFunctionTable:
    """Map separations of cycle ``cycle`` back to the original frame.

    Velocity increments are frame invariant when ``gamma = 1``, so only
    ``r`` changes.
    """
    return replace(t, r=t.r / alpha**cycle, frame="original", cycle=cycle)


def average_over_cycles(
    tables: list[StructureFunctionTable], exclude_cycle0: bool = True
) -> StructureFunctionTable:
    """Pointwise mean over cycles with the sample variance per separation."""
    use = [t for t in tables if not (exclude_cycle0 and t.cycle == 0)]
    if not use:
        raise InconsistentTables("no tables left to average")
    ref = use[0]
    for t in use[1:]:
        if (
            t.order != ref.order
            or t.flavor != ref.flavor
            or t.frame != ref.frame
            or t.r.shape != ref.r.shape
            or not np.allclose(t.r, ref.r, rtol=1e-12, atol=0)
        ):
            raise InconsistentTables(f"cycle {t.cycle} table does not match cycle {ref.cycle}")
    stack = np.stack([t.values for t in use])
    var = stack.var(axis=0, ddof=1) if len(use) > 1 else np.zeros(stack.shape[1])
    return StructureFunctionTable(
        ref.order,
        ref.r.copy(),
        stack.mean(axis=0),
        var,
        cycle="averaged",
        frame=ref.frame,
        flavor=ref.flavor,
        cycles_used=tuple(int(t.cycle) for t in use),
    )


def _in_range(t: StructureFunctionTable, fit_range) -> np.ndarray:
    lo, hi = fit_range
    return (t.r > 0) & (t.r >= lo) & (t.r <= hi)


def fit_power_law(t: StructureFunctionTable, fit_range: tuple[float, float]) -> FitResult:
    """Least-squares line through ``(log r, log |S_n|)`` on ``fit_range``."""
    sel = _in_range(t, fit_range)
    r, s = t.r[sel], t.values[sel]
    if r.size < MIN_FIT_POINTS:
        raise InsufficientPoints(f"{r.size} points in {fit_range}, need {MIN_FIT_POINTS}")
    mag = np.abs(s)
    if np.any(mag <= 0) or not np.all(np.isfinite(mag)):
        raise NonPositiveValues("structure function vanishes inside the fit range")
    res = stats.linregress(np.log(r), np.log(mag))
    sign = int(np.sign(s.sum())) or 1
    return FitResult(
        float(res.slope),
        float(res.intercept),
        float(res.stderr),
        (float(r.min()), float(r.max())),
        int(r.size),
        sign,
    )


def core_range(
    t: StructureFunctionTable, tolerance: float = 0.2, r_max: float | None = None
) -> tuple[float, float]:
    """Widest run of separations on which the local log-log slope stays
    within ``tolerance`` (relative spread ``(max - min) / |median|``)."""
    sel = (t.r > 0) & (np.abs(t.values) > 0)
    if r_max is not None:
        sel &= t.r <= r_max
    r, s = t.r[sel], np.abs(t.values[sel])
    if r.size < MIN_FIT_POINTS:
        raise InsufficientPoints("not enough positive samples to choose a core range")
    slope = np.gradient(np.log(s), np.log(r))
    best = (0, MIN_FIT_POINTS - 1)
    n = r.size
    for i in range(n):
        for j in range(n - 1, i + best[1] - best[0] - 1, -1):
            if j - i + 1 < MIN_FIT_POINTS or j - i <= best[1] - best[0]:
                break
            seg = slope[i : j + 1]
            med = np.median(seg)
            if med != 0 and (seg.max() - seg.min()) / abs(med) < tolerance:
                best = (i, j)
                break
    return float(r[best[0]]), float(r[best[1]])


def original_frame_series(ledger, samples: np.ndarray, key: str = "max_vorticity_component"):
    """Original-frame times and vorticities from concatenated cycle samples."""
    if len(samples) == 0:
        raise EmptySeries("no diagnostics samples")
    scale = np.array([ledger.vorticity_scale(int(c)) for c in samples["cycle"]])
    return np.asarray(samples["t_original"], dtype=float), samples[key] * scale


def bkm_integral(ledger, samples: np.ndarray, key: str = "max_vorticity_component") -> float:
    """Trapezoid rule for the time integral of the vorticity maximum.

    Samples carry local vorticity; each is scaled to the original frame by
    the ledger before integration.
    """
    t, w = original_frame_series(ledger, samples, key)
    if t.size < 2:
        return 0.0
    return float(np.trapezoid(w, t))


def fit_blowup_exponent(
    times: np.ndarray, vorticity: np.ndarray, T_est: float, tail_count: int
) -> BlowupFit:
    """Slope of ``log |omega|_inf`` against ``-log(T_est - t)``.

    Only samples strictly before ``T_est`` are used, then the last
    ``tail_count`` of those.
    """
    t = np.asarray(times, dtype=float)
    w = np.asarray(vorticity, dtype=float)
    keep = t < T_est
    t, w = t[keep], w[keep]
    if tail_count < MIN_FIT_POINTS or t.size < MIN_FIT_POINTS:
        raise InsufficientPoints(f"need at least {MIN_FIT_POINTS} samples before T_est")
    t, w = t[-tail_count:], w[-tail_count:]
    res = stats.linregress(-np.log(T_est - t), np.log(w))
    return BlowupFit(float(T_est), float(res.slope), float(res.stderr), float(res.intercept), int(t.size))
