"""Run orchestration: cascade, checkpoints, diagnostics reports and manifest.

A run directory looks like::

    config.ini              fully resolved configuration (every default)
    manifest.json           hashes, checkpoint list, ledger summary, timing
    checkpoints/cycle_NNN.sck
    diagnostics/            CSV tables, series.csv, summary.json

Diagnostics are always produced by :func:`write_report` reading the
checkpoints back from disk, so ``analyze`` with the same options rewrites
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from .burgers import BurgersModel, cosine_initial
from .checkpoint import load_snapshot, save_snapshot
from .config import RunConfig, config_from_dict, parse_fit_range
from .diagnostics import (
    StructureFunctionTable,
    average_over_cycles,
    bkm_integral,
    core_range,
    fit_blowup_exponent,
    fit_power_law,
    original_frame_series,
    structure_function_1d,
    structure_function_3d,
)
from .errors import ConfigError, MissingCheckpoint, SpecRescaleError
from .euler import EulerModel, taylor_green
from .rescale import CycleLedger, RescaleParams, run_cascade
from .spectral import Grid, PhysicalField, mode_set, spectral_values

log = logging.getLogger(__name__)

__all__ = ["RunManifest", "run", "analyze", "run_or_reuse", "write_report", "read_table_csv"]

MANIFEST = "manifest.json"
CSV_HEADER = "r,S_n,variance"


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _file_record(path: Path, root: Path) -> dict:
    return {"path": str(path.relative_to(root)), "bytes": path.stat().st_size, "sha256": _sha256(path)}


def _finite(x):
    return float(x) if np.isfinite(x) else None


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    config: dict
    complete: bool = False
    error: str | None = None
    checkpoints: list[dict] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    root: Path | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("root")
        return json.dumps(d, indent=2) + "\n"

    def write(self) -> Path:
        path = self.root / MANIFEST
        path.write_text(self.to_json())
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST
        if not path.is_file():
            raise ConfigError(f"no manifest at {path}")
        d = json.loads(path.read_text())
        return cls(**d, root=path.parent)

    def run_config(self) -> RunConfig:
        return config_from_dict(self.config)


# -- model construction --------------------------------------------------------


def build_model(cfg: RunConfig):
    r = cfg.run
    if r.model == "burgers":
        grid = Grid(1, r.n)
        model = BurgersModel(grid, r.viscosity)
        initial = cosine_initial(grid).coeffs if r.initial_condition == "cos-x" else None
    else:
        grid = Grid(3, r.n)
        model = EulerModel(grid, r.viscosity, r.advection_form)
        initial = taylor_green(grid).coeffs if r.initial_condition == "taylor-green" else None
    if initial is None:
        values = np.load(r.initial_file)
        if values.shape != (model.components, *grid.shape):
            raise ConfigError(f"initial_file has shape {values.shape}, expected {(model.components, *grid.shape)}")
        initial = mode_set(grid).from_grid(spectral_values(values, grid))
    return model, initial


# -- diagnostics ---------------------------------------------------------------


def _table_name(order: int, flavor: str, cycle=None) -> str:
    stem = f"sf_n{order}_{flavor}.csv"
    return stem if cycle is None else f"cycles/c{cycle:03d}_{stem}"


def write_table_csv(t: StructureFunctionTable, path: Path) -> Path:
    data = np.column_stack([t.r, t.values, t.variance])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")
    return path


def read_table_csv(path, order: int, cycle=0, flavor: str = "scalar-axis") -> StructureFunctionTable:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return StructureFunctionTable(order, data[:, 0], data[:, 1], data[:, 2], cycle=cycle, flavor=flavor)


def _table_specs(cfg: RunConfig, dim: int) -> list[tuple[int, str]]:
    d = cfg.diagnostics
    specs = [(n, "scalar-axis") for n in d.order_list]
    if dim == 3:
        specs += [(2, f) for f in d.flavor_list]
    return specs


def _cycle_tables(c, grid: Grid, specs, r) -> dict:
    u = PhysicalField(grid, mode_set(grid).values(c))
    out = {}
    for n, flavor in specs:
        if grid.dim == 1:
            out[n, flavor] = structure_function_1d(u, n, r)
        else:
            out[n, flavor] = structure_function_3d(u, n, r, flavor)
    return out


def _fit_json(fit, order, flavor, mode) -> dict:
    return {
        "order": order,
        "flavor": flavor,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "slope_stderr": fit.slope_stderr,
        "fit_range": list(fit.fit_range),
        "n_points": fit.n_points,
        "sign": fit.sign,
        "range_mode": mode,
    }


def write_report(
    checkpoints: list[Path],
    cfg: RunConfig,
    out: Path,
    fit_range: str | tuple[float, float] | None = None,
    exclude_cycle0: bool | None = None,
) -> list[Path]:
    """Recompute every table, fit and summary number from checkpoint files.

    ``fit_range`` and ``exclude_cycle0`` default to the configured values;
    a fit range of ``"auto"`` selects the core range per table.
    """
    d = cfg.diagnostics
    if fit_range is None:
        fit_range = d.fit_range
    if isinstance(fit_range, str):
        fit_range = parse_fit_range(fit_range)
    if exclude_cycle0 is None:
        exclude_cycle0 = d.exclude_cycle0
    out.mkdir(parents=True, exist_ok=True)
    (out / "cycles").mkdir(exist_ok=True)

    snaps, grid = [], None
    for p in checkpoints:
        snap, grid, _ = load_snapshot(p)
        snaps.append(snap)
    if not snaps:
        raise MissingCheckpoint("no checkpoints to analyze")
    params = RescaleParams()
    ledger = CycleLedger(params, [s.entry for s in snaps])
    specs = _table_specs(cfg, grid.dim)
    h = grid.spacing
    r = np.arange(int(np.floor(d.r_max / h + 1e-9)) + 1) * h

    written = []
    per_cycle: dict = {spec: [] for spec in specs}
    for s in snaps:
        for spec, t in _cycle_tables(s.before, grid, specs, r).items():
            t.cycle = s.cycle_index
            per_cycle[spec].append(t)
            written.append(write_table_csv(t, out / _table_name(*spec, s.cycle_index)))

    fits, dispersion = [], {}
    for (n, flavor), tables in per_cycle.items():
        try:
            avg = average_over_cycles(tables, exclude_cycle0)
        except SpecRescaleError as exc:
            log.warning("order %d %s: %s", n, flavor, exc)
            continue
        written.append(write_table_csv(avg, out / _table_name(n, flavor)))
        rng, mode = fit_range, "fixed"
        try:
            if rng is None:
                rng, mode = core_range(avg, d.core_tolerance, d.core_r_max), "core"
            fit = fit_power_law(avg, rng)
        except SpecRescaleError as exc:
            log.warning("fit order %d %s: %s", n, flavor, exc)
            continue
        fits.append(_fit_json(fit, n, flavor, mode))
        if flavor == "scalar-axis":
            intercepts = []
            for t in tables:
                try:
                    intercepts.append(fit_power_law(t, rng).intercept)
                except SpecRescaleError:
                    pass
            if len(intercepts) > 1:
                dispersion[str(n)] = float(np.std(intercepts, ddof=1))

    samples = np.concatenate([s.samples for s in snaps])
    t_orig, w_orig = original_frame_series(ledger, samples)
    series = out / "series.csv"
    cols = list(samples.dtype.names) + ["max_vorticity_original"]
    rows = np.column_stack([samples[c].astype(float) for c in samples.dtype.names] + [w_orig])
    np.savetxt(series, rows, fmt="%.17g", delimiter=",", header=",".join(cols), comments="")
    written.append(series)

    blowup = None
    T_est = ledger.total_time
    tail = samples["cycle"] >= d.blowup_first_cycle
    try:
        b = fit_blowup_exponent(t_orig[tail], w_orig[tail], T_est, d.blowup_tail)
        blowup = {"T_est": b.T_est, "zeta": b.zeta, "zeta_stderr": b.zeta_stderr,
                  "intercept": b.intercept, "points_used": b.points_used,
                  "first_cycle": d.blowup_first_cycle}
    except SpecRescaleError as exc:
        log.warning("blow-up fit skipped: %s", exc)

    entries = ledger.entries
    summary = {
        "model": cfg.run.model,
        "n": grid.n,
        "fringe_profile": cfg.cascade.fringe_profile,
        "exclude_cycle0": exclude_cycle0,
        "fit_range": "auto" if fit_range is None else list(fit_range),
        "ledger": {
            "cycles": len(entries),
            "total_time": T_est,
            "increments": [e.t_original_increment for e in entries],
            "stop_reasons": [e.stop_reason for e in entries],
            "center_original": [None if e.center_original is None else list(e.center_original) for e in entries],
        },
        "fits": fits,
        "intercept_dispersion": dispersion,
        "bkm_integral": bkm_integral(ledger, samples),
        "blowup": blowup,
        "max_vorticity_original": {
            "initial": float(w_orig[0]),
            "final": float(w_orig[-1]),
            "growth_factor": float(w_orig[-1] / w_orig[0]) if w_orig[0] > 0 else None,
        },
        "max_velocity_range": [float(samples["max_velocity"].min()), float(samples["max_velocity"].max())],
        "taylor_scale_min_over_spacing": _finite(samples["taylor_scale"].min() / h),
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n")
    written.append(path)
    return written


# -- entry points --------------------------------------------------------------


def run(cfg: RunConfig, out=None) -> RunManifest:
    """Execute the cascade described by ``cfg`` and write all outputs.

    A numerical failure leaves the checkpoints written so far and a manifest
    with ``complete = false``.
    """
    cfg.validate()
    root = Path(out or cfg.output.directory).resolve()
    cfg.output.directory = str(root)
    (root / "checkpoints").mkdir(parents=True, exist_ok=True)
    (root / "config.ini").write_text(cfg.to_ini())
    manifest = RunManifest(cfg.hash(), code_version(), cfg.as_dict(), root=root)
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    model, initial = build_model(cfg)
    paths: list[Path] = []

    def keep(snap):
        p = save_snapshot(root / "checkpoints" / f"cycle_{snap.cycle_index:03d}.sck", snap, model.grid, model.name)
        paths.append(p)

    def progress(e):
        log.info("cycle %2d %-9s t_local=%.6g T=%.9g steps=%d/%d",
                 e.cycle, e.stop_reason, e.t_local, e.t_original_start + e.t_original_increment,
                 e.steps_accepted, e.steps_rejected)

    try:
        ledger, _ = run_cascade(model, initial, cfg.rescale_config(), cfg.integrator_config(),
                                progress=progress, on_snapshot=keep)
        manifest.ledger = {"cycles": len(ledger), "total_time": ledger.total_time}
        t1 = time.perf_counter()
        written = write_report(paths, cfg, root / "diagnostics")
        manifest.outputs = [_file_record(p, root) for p in written]
        manifest.complete = True
    except (SpecRescaleError, ArithmeticError) as exc:
        log.error("run failed: %s", exc)
        manifest.error = f"{type(exc).__name__}: {exc}"
        t1 = time.perf_counter()
    manifest.checkpoints = [_file_record(p, root) for p in paths]
    manifest.timing = {"started": started, "cascade_seconds": round(t1 - t0, 3),
                       "total_seconds": round(time.perf_counter() - t0, 3)}
    manifest.write()
    return manifest


def analyze(manifest_path, out=None, fit_range=None, exclude_cycle0: bool | None = None) -> list[Path]:
    """Regenerate the diagnostics of a finished run from its checkpoints."""
    m = RunManifest.read(manifest_path)
    if not m.complete:
        raise ConfigError(f"run in {m.root} is incomplete: {m.error}")
    paths = []
    for rec in m.checkpoints:
        p = m.root / rec["path"]
        if not p.is_file():
            raise MissingCheckpoint(str(p))
        paths.append(p)
    target = Path(out) if out is not None else m.root / "analysis"
    return write_report(paths, m.run_config(), target, fit_range, exclude_cycle0)


def run_or_reuse(cfg: RunConfig, cache_root) -> RunManifest:
    """Reuse a complete run with the same config hash under ``cache_root``."""
    root = Path(cache_root) / f"{Path(cfg.output.directory).name}-{cfg.hash()[:16]}"
    if (root / MANIFEST).is_file():
        m = RunManifest.read(root)
        if m.complete and m.config_hash == cfg.hash():
            return m
    return run(cfg, root)
