"""Run configuration: flat key = value files, command-line overrides,
canonical normalized echo."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

MODES = ("validate", "scatter", "cloak", "sweep", "density")


class ConfigError(ValueError):
    """Bad configuration file or override; carries field/line context."""


def _parse_vector(text: str, key: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected three components, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_float_list(text: str, key: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError(f"{key}: empty list")
    return tuple(float(p) for p in parts)


@dataclass
class RunConfig:
    mode: str = "scatter"
    k: float = 2.0
    a: float = 1.0
    alpha: tuple = (0.0, 0.0, 1.0)
    h_real: float = 1.0
    h_imag: float = 0.0
    bc_variant: str = "impedance"          # impedance (variant A) | dirichlet (variant B)
    cap_axis: tuple = (0.0, 0.0, 1.0)
    cap_aperture_deg: float = 30.0
    l_max: str = "auto"                    # "auto" -> ceil(ka) + 20
    basis_p: int = 6
    basis_m: int = 4
    lambda_list: tuple = (1e-6,)
    target_seed: int = 0
    output_dir: str = "out"
    jobs: int = 0                          # 0 -> hardware thread count
    figures: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: unknown mode {self.mode!r}; choose from {MODES}")
        if self.k <= 0:
            raise ConfigError("k: must be > 0")
        if self.a <= 0:
            raise ConfigError("a: must be > 0")
        if self.h_imag < 0:
            raise ConfigError("h_imag: Im h must be >= 0")
        if self.bc_variant not in ("impedance", "dirichlet"):
            raise ConfigError("bc_variant: must be 'impedance' or 'dirichlet'")
        if not 0.0 < self.cap_aperture_deg <= 180.0:
            raise ConfigError("cap_aperture_deg: must lie in (0, 180]")
        if self.l_max != "auto":
            try:
                if int(self.l_max) < 0:
                    raise ConfigError("l_max: must be >= 0 or 'auto'")
            except (TypeError, ValueError):
                raise ConfigError(f"l_max: bad value {self.l_max!r}")
        if self.basis_p < 0 or self.basis_m < 0:
            raise ConfigError("basis_p/basis_m: must be >= 0")
        if any(lam < 0 for lam in self.lambda_list):
            raise ConfigError("lambda_list: entries must be >= 0")
        alpha = np.asarray(self.alpha, dtype=float)
        if np.linalg.norm(alpha) == 0:
            raise ConfigError("alpha: zero vector")
        self.alpha = tuple(alpha / np.linalg.norm(alpha))
        axis = np.asarray(self.cap_axis, dtype=float)
        if np.linalg.norm(axis) == 0:
            raise ConfigError("cap_axis: zero vector")
        self.cap_axis = tuple(axis / np.linalg.norm(axis))

    @property
    def h(self) -> complex:
        return complex(self.h_real, self.h_imag)

    @property
    def aperture_rad(self) -> float:
        # 180 deg means the cap covers the whole sphere; back off a hair so
        # the CapRegion stays a proper subset while every node lands in F
        rad = np.radians(self.cap_aperture_deg)
        return min(rad, np.pi * (1.0 - 1e-12))

    def resolved_l_max(self) -> int:
        if self.l_max == "auto":
            from .solver import default_l_max
            return default_l_max(self.k * self.a)
        return int(self.l_max)

    def echo(self) -> dict:
        """Canonical normalized form, stable under reload."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


_FIELD_PARSERS = {
    "mode": str,
    "k": float,
    "a": float,
    "alpha": lambda v: _parse_vector(v, "alpha"),
    "h_real": float,
    "h_imag": float,
    "bc_variant": str,
    "cap_axis": lambda v: _parse_vector(v, "cap_axis"),
    "cap_aperture_deg": float,
    "l_max": str,
    "basis_p": int,
    "basis_m": int,
    "lambda_list": lambda v: _parse_float_list(v, "lambda_list"),
    "target_seed": int,
    "output_dir": str,
    "jobs": int,
    "figures": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}


def _apply(settings: dict, key: str, raw: str, where: str):
    if key not in _FIELD_PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        settings[key] = _FIELD_PARSERS[key](raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None,
                mode: str | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus --key value overrides."""
    settings: dict = {}
    if path is not None:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            _apply(settings, key.strip(), raw.strip(), f"{path}:{lineno}")
    for key, raw in (overrides or {}).items():
        _apply(settings, key, raw, "command line")
    if mode is not None:
        settings["mode"] = mode
    try:
        return RunConfig(**settings)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
