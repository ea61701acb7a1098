"""Flat ``key = value`` configuration files.

Lines are ``key = value``; ``#`` starts a comment. Keys::

    model            fisher | ungulate          (required)
    d, r             fisher diffusion and growth rate (default 1, 1)
    d1, d2, alpha, delta, r1, r2                (ungulate, all required)
    c                comma-separated wave speeds
    X, dx, t_end, dt, theta, init_halfwidth     simulation settings
    wave_L, wave_h   wave grid half-length and step
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, SpreadwaveError
from .models import UngulateParams, fisher, ungulate
from .pde import SimConfig

MODEL_KEYS = {
    "fisher": {"d": 1.0, "r": 1.0},
    "ungulate": {"d1": None, "d2": None, "alpha": None, "delta": None, "r1": None, "r2": None},
}
SIM_KEYS = ("X", "dx", "t_end", "dt", "theta", "init_halfwidth")
WAVE_KEYS = ("wave_L", "wave_h")
ALL_KEYS = {"model", "c"} | set(SIM_KEYS) | set(WAVE_KEYS) | {k for v in MODEL_KEYS.values() for k in v}


@dataclass(frozen=True)
class AppConfig:
    model_name: str
    model_params: dict
    c_values: tuple = ()
    sim: SimConfig = field(default_factory=SimConfig)
    wave_L: float | None = None
    wave_h: float | None = None
    path: Path | None = None

    def build_model(self):
        return model_from_config(self)


def parse_text(text: str, path: Path | None = None) -> AppConfig:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first on line {raw[key][1]})", line=lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno)
        raw[key] = (value, lineno)

    if "model" not in raw:
        raise ConfigError("missing required key 'model'")
    name, name_line = raw.pop("model")
    if name not in MODEL_KEYS:
        raise ConfigError(f"unknown model {name!r} (expected fisher or ungulate)", line=name_line)

    def num(key):
        value, lineno = raw[key]
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}", line=lineno) from None

    allowed = MODEL_KEYS[name]
    params = {}
    for key in list(raw):
        if key in {k for v in MODEL_KEYS.values() for k in v} and key not in allowed:
            raise ConfigError(f"key {key!r} does not apply to model {name}", line=raw[key][1])
    for key, default in allowed.items():
        if key in raw:
            params[key] = num(key)
        elif default is None:
            raise ConfigError(f"model {name} requires key {key!r}")
        else:
            params[key] = default

    cs: tuple = ()
    if "c" in raw:
        value, lineno = raw["c"]
        try:
            cs = tuple(float(x) for x in value.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"c must be a comma-separated list of numbers, got {value!r}", line=lineno) from None

    sim_kwargs = {k: num(k) for k in SIM_KEYS if k in raw}
    try:
        sim = SimConfig(**sim_kwargs)
    except SpreadwaveError as exc:
        raise ConfigError(str(exc)) from None
    cfg = AppConfig(
        model_name=name, model_params=params, c_values=cs, sim=sim,
        wave_L=num("wave_L") if "wave_L" in raw else None,
        wave_h=num("wave_h") if "wave_h" in raw else None,
        path=path,
    )
    # model parameter errors (alpha >= r1, non-positive rates...) are config errors
    try:
        model_from_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load(path) -> AppConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, path)


def model_from_config(cfg: AppConfig):
    p = cfg.model_params
    if cfg.model_name == "fisher":
        return fisher(d=p["d"], r=p["r"])
    return ungulate(ungulate_params(cfg))


def ungulate_params(cfg: AppConfig) -> UngulateParams:
    p = cfg.model_params
    return UngulateParams(d1=p["d1"], d2=p["d2"], alpha=p["alpha"], delta=p["delta"], r1=p["r1"], r2=p["r2"])
