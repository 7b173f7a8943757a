"""Run configuration: INI files with sections, validated before any work starts."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .integrate import IntegratorConfig
from .rescale import FRINGE_PROFILES, RescaleConfig

__all__ = ["RunConfig", "load_config", "load_preset", "config_from_dict", "parse_fit_range", "PRESETS"]

PRESETS = ("burgers_calibration", "euler_tg_32", "euler_eps_1e-3", "euler_eps_1e-5")
INITIAL_CONDITIONS = {"burgers": ("cos-x", "file"), "euler": ("taylor-green", "file")}
# keys that change where results go but not what they are
_NON_NUMERIC = {("output", "directory")}


@dataclass
class RunSection:
    model: str = "burgers"
    n: int = 1024
    initial_condition: str = "cos-x"
    initial_file: str = ""
    viscosity: float = 0.0
    advection_form: str = "rotational"
    seed: int = 0


@dataclass
class CascadeSection:
    epsilon: float = 2.5e-7
    max_cycles: int = 45
    vorticity_mode: str = "component"
    fringe_profile: str = "raised_cosine"
    fringe_runtime_forcing: bool = False
    forcing_strength: float = 0.0
    cycle_time_limit: float = 100.0


@dataclass
class IntegratorSection:
    tol_per_unit_step: float = 1e-10
    dt_init: float = 1e-3
    dt_min: float = 1e-14
    dt_max: float = 0.1
    safety_factor: float = 0.9


@dataclass
class DiagnosticsSection:
    orders: str = "2,3,4,5"
    # extra second-order flavors for 3D runs
    flavors: str = "longitudinal,transverse"
    r_max: float = math.pi
    fit_range: str = "auto"
    core_r_max: float = 1.0
    core_tolerance: float = 0.2
    exclude_cycle0: bool = True
    blowup_first_cycle: int = 18
    blowup_tail: int = 10000

    @property
    def order_list(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.orders.split(",") if x.strip())

    @property
    def flavor_list(self) -> tuple[str, ...]:
        return tuple(x.strip() for x in self.flavors.split(",") if x.strip())

    @property
    def fit_bounds(self) -> tuple[float, float] | None:
        return parse_fit_range(self.fit_range)


@dataclass
class OutputSection:
    directory: str = "runs/out"


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    cascade: CascadeSection = field(default_factory=CascadeSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    output: OutputSection = field(default_factory=OutputSection)
    source: str = ""

    def sections(self):
        for f in fields(self):
            if f.name != "source":
                yield f.name, getattr(self, f.name)

    def validate(self) -> "RunConfig":
        r, c, d = self.run, self.cascade, self.diagnostics
        if r.model not in INITIAL_CONDITIONS:
            raise ConfigError(f"model must be burgers or euler, got {r.model!r}")
        if r.initial_condition not in INITIAL_CONDITIONS[r.model]:
            raise ConfigError(f"initial_condition {r.initial_condition!r} not available for {r.model}")
        if r.initial_condition == "file":
            p = Path(r.initial_file)
            if not r.initial_file or not p.is_file():
                raise ConfigError(f"initial_file {r.initial_file!r} does not exist")
        if r.n < 8 or r.n % 8:
            raise ConfigError("n must be a multiple of 8 and at least 8")
        if r.viscosity < 0:
            raise ConfigError("viscosity must be >= 0")
        if r.advection_form not in ("convective", "rotational"):
            raise ConfigError(f"unknown advection_form {r.advection_form!r}")
        if not 0 < c.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {c.epsilon}")
        if c.max_cycles < 0:
            raise ConfigError("max_cycles must be >= 0")
        if c.vorticity_mode not in ("component", "modulus"):
            raise ConfigError(f"unknown vorticity_mode {c.vorticity_mode!r}")
        if c.fringe_profile not in FRINGE_PROFILES:
            raise ConfigError(f"unknown fringe_profile {c.fringe_profile!r}")
        if c.forcing_strength < 0 or not c.cycle_time_limit > 0:
            raise ConfigError("forcing_strength must be >= 0 and cycle_time_limit > 0")
        try:
            self.integrator_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not d.order_list or min(d.order_list) < 2:
            raise ConfigError("diagnostics orders must be integers >= 2")
        bad = set(d.flavor_list) - {"longitudinal", "transverse"}
        if bad:
            raise ConfigError(f"unknown flavors {sorted(bad)}")
        if not d.r_max > 0 or not d.core_r_max > 0 or not 0 < d.core_tolerance < 1:
            raise ConfigError("r_max, core_r_max must be positive and core_tolerance in (0, 1)")
        d.fit_bounds
        if d.blowup_tail < 5 or d.blowup_first_cycle < 0:
            raise ConfigError("blowup_tail must be >= 5 and blowup_first_cycle >= 0")
        return self

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(**dataclasses.asdict(self.integrator))

    def rescale_config(self) -> RescaleConfig:
        return RescaleConfig(**dataclasses.asdict(self.cascade))

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for name, sec in self.sections():
            cp[name] = {k: _fmt(v) for k, v in dataclasses.asdict(sec).items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {name: dataclasses.asdict(sec) for name, sec in self.sections()}

    def hash(self) -> str:
        """SHA-256 over every setting that affects numerical results."""
        items = []
        for name, sec in self.sections():
            for k, v in sorted(dataclasses.asdict(sec).items()):
                if (name, k) not in _NON_NUMERIC:
                    items.append(f"{name}.{k}={_fmt(v)}")
        return hashlib.sha256("\n".join(items).encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_fit_range(text: str) -> tuple[float, float] | None:
    """``"auto"`` means the core range is chosen per table; else ``"lo,hi"``."""
    if text.strip().lower() == "auto":
        return None
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"fit_range must be 'auto' or 'lo,hi', got {text!r}") from None
    if not 0 <= lo < hi:
        raise ConfigError(f"fit_range needs 0 <= lo < hi, got {text!r}")
    return lo, hi


def _coerce(sec, cp: configparser.ConfigParser, name: str):
    known = {f.name: f for f in fields(sec)}
    for key in cp[name]:
        if key not in known:
            raise ConfigError(f"unknown key [{name}] {key}")
        typ = type(getattr(sec, key))
        try:
            if typ is bool:
                val = cp.getboolean(name, key)
            elif typ is int:
                val = cp.getint(name, key)
            elif typ is float:
                val = cp.getfloat(name, key)
            else:
                val = cp.get(name, key).strip()
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key}: {exc}") from None
        setattr(sec, key, val)


def parse_config(text: str, source: str = "<string>", base_dir: Path | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(source=source)
    names = dict(cfg.sections())
    for name in cp.sections():
        if name not in names:
            raise ConfigError(f"unknown section [{name}]")
        _coerce(names[name], cp, name)
    # per-model defaults when the file leaves them out
    if cfg.run.model == "euler" and not cp.has_option("run", "initial_condition"):
        cfg.run.initial_condition = "taylor-green"
    if cfg.run.initial_file and base_dir is not None and not Path(cfg.run.initial_file).is_absolute():
        cfg.run.initial_file = str((base_dir / cfg.run.initial_file).resolve())
    return cfg.validate()


def config_from_dict(d: dict, source: str = "<dict>") -> RunConfig:
    """Inverse of :meth:`RunConfig.as_dict`."""
    cp = configparser.ConfigParser(interpolation=None)
    for name, items in d.items():
        cp[name] = {k: _fmt(v) for k, v in items.items()}
    buf = io.StringIO()
    cp.write(buf)
    return parse_config(buf.getvalue(), source)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    return parse_config(path.read_text(), str(path), path.parent)


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("specrescale.presets").joinpath(f"{name}.ini").read_text()
    return parse_config(text, f"preset:{name}")
