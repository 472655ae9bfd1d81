"""Plain-text experiment configuration.

    # comment
    [group]
    d = 2
    p = 2

    [run]
    j = 0
    t_min = 20
    t_max = 200
    t_count = 16

    [tolerances]
    tol = 1e-8
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .algebra import ConstraintViolated, DimensionIncompatible, build_htype_group


class ConfigError(ValueError):
    pass


# key -> section; every key has a default in ExperimentConfig
SECTIONS = {
    "d": "group", "p": "group",
    "j": "run", "j_min": "run", "j_max": "run",
    "t_min": "run", "t_max": "run", "t_count": "run", "t_log": "run",
    "m_cut": "run", "r_max": "run", "sigma_max": "run",
    "strichartz_t_max": "run", "strichartz_t_count": "run",
    "out": "run",
    "tol": "tolerances", "trunc_tol": "tolerances",
}


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 2
    p: int = 2
    j: int = 0
    j_min: int = -2
    j_max: int = 2
    t_min: float = 20.0
    t_max: float = 200.0
    t_count: int = 16
    t_log: bool = True
    m_cut: int = 0               # 0: chosen by the truncation rule
    r_max: float = 0.0           # 0: default search box
    sigma_max: float = 0.0
    strichartz_t_max: float = 2.0
    strichartz_t_count: int = 9
    out: str = ""
    tol: float = 1e-8
    trunc_tol: float = 1e-4

    def t_grid(self) -> np.ndarray:
        if self.t_log:
            return np.geomspace(self.t_min, self.t_max, self.t_count)
        return np.linspace(self.t_min, self.t_max, self.t_count)

    def search_box(self):
        if self.r_max > 0 and self.sigma_max > 0:
            return (self.r_max, self.sigma_max)
        return None

    def validate(self) -> "ExperimentConfig":
        if self.p < 2:
            raise ConfigError("p must be >= 2 (standing assumption p > 1 on the centre dimension)")
        if self.p + 1 > 2 * self.d:
            raise ConfigError(f"p + 1 <= 2d is required (got p = {self.p}, d = {self.d})")
        try:
            build_htype_group(self.p, self.d)
        except (ConstraintViolated, DimensionIncompatible) as exc:
            raise ConfigError(str(exc)) from exc
        if not (self.tol > 0 and self.trunc_tol > 0):
            raise ConfigError("tolerances must be positive")
        if not self.t_min > 0 or self.t_max < self.t_min or self.t_count < 2:
            raise ConfigError("time grid needs 0 < t_min <= t_max and t_count >= 2")
        if self.j_min > self.j_max:
            raise ConfigError("j_min must not exceed j_max")
        if self.m_cut < 0 or self.strichartz_t_count < 2 or not self.strichartz_t_max > 0:
            raise ConfigError("invalid m_cut or Strichartz time grid")
        return self

    def echo(self) -> list[str]:
        return [f"{k} = {v}" for k, v in asdict(self).items()]


def _coerce(key: str, raw: str):
    typ = {f.name: f.type for f in fields(ExperimentConfig)}[key]
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text: str, overrides: list[str] | tuple = ()) -> ExperimentConfig:
    """Parse config text plus `key=value` overrides (key or section.key)."""
    cp = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                   interpolation=None, default_section="__defaults__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section not in ("group", "run", "tolerances"):
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if SECTIONS.get(key) != section:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = _coerce(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, key = key.split(".", 1)
            if SECTIONS.get(key) != section:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
        if key not in SECTIONS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return replace(ExperimentConfig(), **values).validate()
