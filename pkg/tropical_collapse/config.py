"""配置加载与验证工具 | configuration loading and validation."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Mapping, Optional
import os

from .errors import BadParameter


_TRUE_VALUES = {"1", "true", "t", "yes", "y", "on"}
_ENV_PREFIX = "TROPI_"


def _as_bool(value: Optional[str], default: bool) -> bool:
    if value is None:
        return default
    return value.strip().lower() in _TRUE_VALUES


def _as_int(value: Optional[str], default: int) -> int:
    if value is None:
        return default
    try:
        return int(value.strip())
    except ValueError:
        return default


def _as_float(value: Optional[str], default: float) -> float:
    if value is None:
        return default
    try:
        return float(value.strip())
    except ValueError:
        return default


@dataclass(frozen=True)
class Config:
    tolerance: float = 1e-9
    cover_tolerance: float = 1e-3
    spacing: float = 0.05
    budget: int = 10_000
    seed: int = 0
    u: float = 3.0
    max_genus: int = 5
    max_iso_edges: int = 12
    max_svp_dim: int = 8
    max_cover_dim: int = 4
    max_net_dim: int = 4
    max_iso_dim: int = 4
    max_net_points: int = 2000
    max_restarts: int = 16
    packing_scales: int = 24
    cover_max_boxes: int = 200_000
    max_iter: int = 200
    workers: int = 1
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @classmethod
    def from_environment(cls, overrides: Optional[Mapping[str, object]] = None) -> "Config":
        overrides = dict(overrides or {})
        env = os.environ

        def pick_float(name: str, key: str, default: float) -> float:
            if overrides.get(name) is not None:
                return float(overrides[name])  # type: ignore[arg-type]
            return _as_float(env.get(_ENV_PREFIX + key), default)

        def pick_int(name: str, key: str, default: int) -> int:
            if overrides.get(name) is not None:
                return int(overrides[name])  # type: ignore[arg-type]
            return _as_int(env.get(_ENV_PREFIX + key), default)

        defaults = cls()
        max_dim = _as_int(env.get(_ENV_PREFIX + "MAX_DIM"), 0)
        if overrides.get("max_dim") is not None:
            max_dim = int(overrides["max_dim"])  # type: ignore[arg-type]

        cover_cap = max_dim or pick_int("max_cover_dim", "MAX_COVER_DIM", defaults.max_cover_dim)
        net_cap = max_dim or pick_int("max_net_dim", "MAX_NET_DIM", defaults.max_net_dim)
        iso_cap = max_dim or pick_int("max_iso_dim", "MAX_ISO_DIM", defaults.max_iso_dim)
        svp_cap = pick_int("max_svp_dim", "MAX_SVP_DIM", defaults.max_svp_dim)
        if max_dim:
            svp_cap = max(svp_cap, max_dim)

        debug = _as_bool(env.get(_ENV_PREFIX + "DEBUG"), False)
        log_level = overrides.get("log_level") or env.get(
            _ENV_PREFIX + "LOG_LEVEL", "DEBUG" if debug else defaults.log_level
        )
        log_file = overrides.get("log_file") or env.get(_ENV_PREFIX + "LOG_FILE")

        config = cls(
            tolerance=pick_float("tolerance", "TOLERANCE", defaults.tolerance),
            cover_tolerance=pick_float("cover_tolerance", "COVER_TOL", defaults.cover_tolerance),
            spacing=pick_float("spacing", "SPACING", defaults.spacing),
            budget=pick_int("budget", "BUDGET", defaults.budget),
            seed=pick_int("seed", "SEED", defaults.seed),
            u=pick_float("u", "SIEGEL_U", defaults.u),
            max_genus=pick_int("max_genus", "MAX_GENUS", defaults.max_genus),
            max_iso_edges=pick_int("max_iso_edges", "MAX_ISO_EDGES", defaults.max_iso_edges),
            max_svp_dim=svp_cap,
            max_cover_dim=cover_cap,
            max_net_dim=net_cap,
            max_iso_dim=iso_cap,
            max_net_points=pick_int("max_net_points", "MAX_NET_POINTS", defaults.max_net_points),
            max_restarts=pick_int("max_restarts", "MAX_RESTARTS", defaults.max_restarts),
            packing_scales=pick_int("packing_scales", "PACKING_SCALES", defaults.packing_scales),
            cover_max_boxes=pick_int("cover_max_boxes", "COVER_MAX_BOXES", defaults.cover_max_boxes),
            max_iter=pick_int("max_iter", "MAX_ITER", defaults.max_iter),
            workers=pick_int("workers", "WORKERS", defaults.workers),
            log_level=str(log_level),
            log_file=str(log_file) if log_file else None,
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Reject non-positive numeric settings; the seed may be any integer."""
        for item in fields(self):
            if item.name in {"seed", "log_level", "log_file"}:
                continue
            value = getattr(self, item.name)
            if value <= 0:
                raise BadParameter(f"configuration value {item.name}={value!r} must be positive")
        if self.u <= 1:
            raise BadParameter(f"Siegel parameter u must exceed 1, got {self.u}")

    def with_overrides(self, **changes: object) -> "Config":
        updated = replace(self, **changes)  # type: ignore[arg-type]
        updated.validate()
        return updated


@lru_cache(maxsize=1)
def default_config() -> Config:
    return Config.from_environment()


def resolve(config: Optional[Config]) -> Config:
    return config if config is not None else default_config()
