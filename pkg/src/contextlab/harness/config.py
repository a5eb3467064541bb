"""Sweep configuration: a line-oriented ``key = value`` file.

Example::

    # sweep over the splitter angle
    vartheta_grid = 0deg:90deg:5deg
    theta_grid    = 0, 22.5deg, 0.5236
    mc_count      = 100000
    quadrature_nodes = 256
    seed          = 12345
    output_format = csv
    emit_curves   = true

Grids are ``start:stop:step`` (``stop`` included when within half a step) or
comma-separated values.  Angles are radians unless suffixed with ``deg``.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

from ..errors import ConfigParseError, ConfigValidationError

KEYS = (
    "vartheta_grid",
    "theta_grid",
    "mc_count",
    "quadrature_nodes",
    "seed",
    "output_format",
    "emit_curves",
)
SEED_ENV = "CONTEXTLAB_SEED"
MAX_SEED = 2**64 - 1
MAX_GRID_POINTS = 100_000


@dataclass(frozen=True)
class SweepSpec:
    vartheta_grid: tuple[float, ...]
    theta_grid: tuple[float, ...]
    mc_count: int = 10_000
    quadrature_nodes: int = 256
    seed: int = 0
    output_format: str = "csv"
    emit_curves: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vartheta_grid", tuple(float(v) for v in self.vartheta_grid))
        object.__setattr__(self, "theta_grid", tuple(float(v) for v in self.theta_grid))
        validate(self)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vartheta_grid"] = list(self.vartheta_grid)
        d["theta_grid"] = list(self.theta_grid)
        return d


def validate(spec: SweepSpec) -> None:
    if not spec.vartheta_grid:
        raise ConfigValidationError("vartheta_grid", "grid is empty")
    if not spec.theta_grid:
        raise ConfigValidationError("theta_grid", "grid is empty")
    for name in ("vartheta_grid", "theta_grid"):
        if not all(math.isfinite(v) for v in getattr(spec, name)):
            raise ConfigValidationError(name, "grid values must be finite")
    if spec.mc_count < 100:
        raise ConfigValidationError("mc_count", f"must be >= 100, got {spec.mc_count}")
    if spec.quadrature_nodes < 64:
        raise ConfigValidationError(
            "quadrature_nodes", f"must be >= 64, got {spec.quadrature_nodes}"
        )
    if not 0 <= spec.seed <= MAX_SEED:
        raise ConfigValidationError("seed", "must be an unsigned 64-bit integer")
    if spec.output_format not in ("csv", "json"):
        raise ConfigValidationError(
            "output_format", f"must be 'csv' or 'json', got {spec.output_format!r}"
        )


def parse_angle(text: str) -> float:
    t = text.strip().lower()
    if t.endswith("deg"):
        return math.radians(float(t[:-3]))
    return float(t)


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (parse_angle(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        if stop < start:
            raise ValueError("range stop must not precede start")
        n = math.floor((stop - start) / step + 0.5) + 1
        if n > MAX_GRID_POINTS:
            raise ValueError(f"range has {n} points (limit {MAX_GRID_POINTS})")
        return tuple(start + k * step for k in range(n))
    return tuple(parse_angle(p) for p in text.split(",") if p.strip())


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text: str) -> int:
    t = text.strip().replace("_", "")
    # allow 1e6 style counts as long as they are integral
    if "e" in t.lower():
        value = float(t)
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)
    return int(t)


_PARSERS = {
    "vartheta_grid": parse_grid,
    "theta_grid": parse_grid,
    "mc_count": _parse_int,
    "quadrature_nodes": _parse_int,
    "seed": _parse_int,
    "output_format": lambda t: t.strip().lower(),
    "emit_curves": _parse_bool,
}


def parse_spec_text(text: str, env: Mapping[str, str] | None = None) -> SweepSpec:
    """Parse config text; the seed falls back to ``CONTEXTLAB_SEED`` then 0."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigParseError(f"{key}: {exc}", lineno) from None

    for grid in ("vartheta_grid", "theta_grid"):
        values.setdefault(grid, ())
    if "seed" not in values:
        env = os.environ if env is None else env
        raw_seed = env.get(SEED_ENV)
        if raw_seed is not None:
            try:
                values["seed"] = _parse_int(raw_seed)
            except ValueError:
                raise ConfigValidationError("seed", f"{SEED_ENV}={raw_seed!r} is not an integer")
    return SweepSpec(**values)


def load_spec(path: str | os.PathLike, env: Mapping[str, str] | None = None) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_spec_text(text, env)
