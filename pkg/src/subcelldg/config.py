"""Run configuration: INI-style files with per-key command line overrides.

Every key lives in a section (``[mesh] nx = 64``) and can be overridden
on the command line with ``--set mesh.nx=64``. Unset keys fall back to
the selected case's defaults when the run is assembled.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

__all__ = ["ConfigError", "RunConfig", "parse_config"]


class ConfigError(ValueError):
    pass


# (section, key) -> dataclass field, type
_SCHEMA = {
    ("case", "id"): ("case", str),
    ("case", "preset"): ("preset", str),
    ("mesh", "nx"): ("nx", int),
    ("mesh", "ny"): ("ny", int),
    ("mesh", "degree"): ("degree", int),
    ("numerics", "volume_mode"): ("volume_mode", str),
    ("numerics", "volume_flux"): ("volume_flux", str),
    ("numerics", "surface_flux"): ("surface_flux", str),
    ("numerics", "blend"): ("blend", str),
    ("fv", "order"): ("fv_order", int),
    ("fv", "flux"): ("fv_flux", str),
    ("limiter", "mode"): ("limiter_mode", str),
    ("limiter", "constraints"): ("constraints", str),
    ("limiter", "beta"): ("beta", float),
    ("limiter", "bounds_source"): ("bounds_source", str),
    ("limiter", "gamma_relax"): ("gamma_relax", float),
    ("limiter", "audit"): ("audit", bool),
    ("indicator", "quantity"): ("indicator_quantity", str),
    ("indicator", "alpha_max"): ("alpha_max", float),
    ("indicator", "alpha_floor"): ("alpha_floor", float),
    ("time", "cfl"): ("cfl", float),
    ("time", "t_final"): ("t_final", float),
    ("time", "max_steps"): ("max_steps", int),
    ("output", "dir"): ("outdir", str),
    ("output", "cadence"): ("cadence", float),
    ("run", "seed"): ("seed", int),
    ("run", "dof_cap"): ("dof_cap", int),
}


@dataclass
class RunConfig:
    """Fully-typed run options; None means "use the case default"."""

    case: str = "kpp"
    preset: str = "desk"
    nx: int | None = None
    ny: int | None = None
    degree: int | None = None
    volume_mode: str | None = None
    volume_flux: str | None = None
    surface_flux: str | None = None
    blend: str | None = None
    fv_order: int | None = None
    fv_flux: str | None = None
    limiter_mode: str | None = None
    constraints: str | None = None
    beta: float | None = None
    bounds_source: str | None = None
    gamma_relax: float = 4.0
    audit: bool = True
    indicator_quantity: str | None = None
    alpha_max: float | None = None
    alpha_floor: float | None = None
    cfl: float = 0.5
    t_final: float | None = None
    max_steps: int = 1_000_000_000
    outdir: str = "out"
    cadence: float | None = None
    seed: int = 0               # reserved; the physics is deterministic
    dof_cap: int = 40_000_000

    def validate(self):
        if self.blend not in (None, "element", "subcell"):
            raise ConfigError(f"numerics.blend must be element|subcell, "
                              f"got {self.blend!r}")
        if self.limiter_mode not in (None, "off", "apriori", "fct"):
            raise ConfigError(f"limiter.mode must be off|apriori|fct, "
                              f"got {self.limiter_mode!r}")
        if self.volume_mode not in (None, "split", "standard"):
            raise ConfigError(f"numerics.volume_mode must be split|standard, "
                              f"got {self.volume_mode!r}")
        if self.fv_order not in (None, 1, 2):
            raise ConfigError(f"fv.order must be 1|2, got {self.fv_order!r}")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"time.cfl must be in (0,1], got {self.cfl}")
        return self


def _convert(value: str, typ, where: str):
    value = value.strip()
    try:
        if typ is bool:
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        return typ(value)
    except ValueError as exc:
        raise ConfigError(f"bad value {value!r} for {where}") from exc


def parse_config(path=None, sets=()):
    """Build a RunConfig from an optional INI file plus --set overrides."""
    cfg = RunConfig()
    valid_fields = {f.name for f in fields(RunConfig)}

    def apply(section, key, raw):
        spec = _SCHEMA.get((section, key))
        if spec is None:
            raise ConfigError(f"unknown config key [{section}] {key}")
        name, typ = spec
        assert name in valid_fields
        setattr(cfg, name, _convert(raw, typ, f"[{section}] {key}"))

    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                apply(section, key, raw)
    for item in sets:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        apply(section.strip(), key.strip(), raw)
    return cfg.validate()
