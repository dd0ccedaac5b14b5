"""Configuration for the diffraction tools: environment settings and per-run configs."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import find_dotenv, load_dotenv

from app.errors import ConfigError

FORMATS = ("csv", "json")
_CASTS = {"int": int, "float": float, "Optional[int]": int, "Optional[float]": float}


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        raise ConfigError(f"Environment variable {name} must be an integer, got {raw!r}") from None


@dataclass
class Settings:
    """Application settings loaded from environment variables.

    Attributes:
        prec_bits: default working precision in bits.
        size_cap: largest word length any command may build.
        runs_db_path: path to the SQLite file with the run history.
        workers: number of processes for k-point evaluation.
        log_level: logging level name.
    """

    prec_bits: int = 256
    size_cap: int = 10_000_000
    runs_db_path: Path = Path("runs.db")
    workers: int = 1
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        """Load settings from environment variables with sensible defaults."""

        # Поддерживаем локальную настройку с помощью файла .env
        dotenv_path = find_dotenv(usecwd=True)
        if dotenv_path:
            load_dotenv(dotenv_path=dotenv_path)

        settings = cls(
            prec_bits=_env_int("PISOT_PREC_BITS", 256),
            size_cap=_env_int("PISOT_SIZE_CAP", 10_000_000),
            runs_db_path=Path(os.environ.get("PISOT_RUNS_DB", "runs.db")),
            workers=_env_int("PISOT_WORKERS", 1),
            log_level=os.environ.get("PISOT_LOG_LEVEL", "INFO").upper(),
        )
        if settings.prec_bits < 64:
            raise ConfigError(f"PISOT_PREC_BITS must be at least 64, got {settings.prec_bits}")
        if settings.workers < 1:
            raise ConfigError(f"PISOT_WORKERS must be positive, got {settings.workers}")
        return settings


@dataclass
class RunConfig:
    """Parameters of one command run after merging the config file and the flags."""

    rule: Optional[str] = None
    k: List[str] = field(default_factory=list)
    module_kmax: Optional[float] = None
    coeff_bound: int = 3
    n_max: int = 20
    prec_bits: int = 256
    samples: int = 50
    seed: int = 0
    grid_steps: int = 20
    n_scan: int = 60
    xi: Optional[str] = None
    eps: float = 0.01
    tail_start: Optional[int] = None
    window_level: int = 24
    digits: int = 12
    out: Optional[str] = None
    format: str = "csv"
    timestamp: bool = True

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def build(
        cls,
        file_values: Optional[Mapping[str, Any]] = None,
        flag_values: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """Merges config file values with flags; flags set to None do not override."""

        known = set(cls.keys())
        merged: Dict[str, Any] = {}
        for source, values in (("config file", file_values or {}), ("flags", flag_values or {})):
            unknown = sorted(set(values) - known)
            if unknown:
                raise ConfigError(f"Unknown keys in {source}: {', '.join(unknown)}")
            for key, value in values.items():
                if value is not None:
                    merged[key] = value
        if isinstance(merged.get("k"), str):
            merged["k"] = [merged["k"]]
        for item in fields(cls):
            cast = _CASTS.get(str(item.type))
            if cast is not None and item.name in merged:
                try:
                    merged[item.name] = cast(merged[item.name])
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"{item.name} must be {str(item.type)}, got {merged[item.name]!r}"
                    ) from None
        config = cls(**merged)
        config.validate()
        return config

    def validate(self) -> None:
        if self.n_max < 1:
            raise ConfigError(f"n_max must be positive, got {self.n_max}")
        if self.prec_bits < 64:
            raise ConfigError(f"prec_bits must be at least 64, got {self.prec_bits}")
        if self.samples < 1:
            raise ConfigError(f"samples must be at least 1, got {self.samples}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.grid_steps < 2:
            raise ConfigError(f"grid_steps must be at least 2, got {self.grid_steps}")
        if self.n_scan < 2:
            raise ConfigError(f"n_scan must be at least 2, got {self.n_scan}")
        if self.coeff_bound < 1:
            raise ConfigError(f"coeff_bound must be positive, got {self.coeff_bound}")
        if self.module_kmax is not None and self.module_kmax < 0:
            raise ConfigError(f"module_kmax must be nonnegative, got {self.module_kmax}")
        if not 0 < self.eps < 0.25:
            raise ConfigError(f"eps must lie in (0, 1/4), got {self.eps}")
        if self.window_level < 2:
            raise ConfigError(f"window_level must be at least 2, got {self.window_level}")
        if self.digits < 1:
            raise ConfigError(f"digits must be positive, got {self.digits}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")

    def to_json(self) -> str:
        return json.dumps({key: getattr(self, key) for key in self.keys()}, sort_keys=True)


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Reads a JSON object of run parameters; None gives an empty mapping."""

    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}
