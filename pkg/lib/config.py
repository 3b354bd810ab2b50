"""
Runtime settings.

Values come from the process environment, which the launcher seeds from a
``.env`` file with python-dotenv. Experiment presets use the same flat
``KEY=VALUE`` format and are read with ``dotenv_values``.
"""

import os
import logging
from dataclasses import dataclass, asdict, field
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values

try:
    from .errors import ConfigError
except ImportError:
    from errors import ConfigError

logger = logging.getLogger(__name__)


def _env_int(key: str, default: int) -> int:
    raw = os.getenv(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class Settings:
    """Caps and budgets shared by every module"""
    max_n: int = 6
    trial_division_bound: int = 10**6
    node_budget: int = 10**9
    bruteforce_budget: int = 10**8
    quadrature_budget: int = 10**6
    orbit_max_n: int = 4
    precision_bits: int = 128
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            max_n=_env_int("MQ_MAX_N", cls.max_n),
            trial_division_bound=_env_int("MQ_TRIAL_DIVISION_BOUND", cls.trial_division_bound),
            node_budget=_env_int("MQ_NODE_BUDGET", cls.node_budget),
            bruteforce_budget=_env_int("MQ_BRUTEFORCE_BUDGET", cls.bruteforce_budget),
            quadrature_budget=_env_int("MQ_QUADRATURE_BUDGET", cls.quadrature_budget),
            orbit_max_n=_env_int("MQ_ORBIT_MAX_N", cls.orbit_max_n),
            precision_bits=_env_int("MQ_PRECISION_BITS", cls.precision_bits),
            log_level=os.getenv("MQ_LOG_LEVEL", cls.log_level).upper(),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def get_settings() -> Settings:
    """Settings as currently visible in the environment"""
    return Settings.from_env()


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q``, an integer, or a decimal into an exact rational"""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def parse_int_list(text: str) -> Tuple[int, ...]:
    """Parse a comma list of integers; ``1e6`` style exponents are accepted"""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "e" in part.lower():
                mantissa, exponent = part.lower().split("e")
                values.append(int(mantissa) * 10 ** int(exponent))
            elif "^" in part:
                base, exponent = part.split("^")
                values.append(int(base) ** int(exponent))
            else:
                values.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"not an integer: {part!r}") from exc
    return tuple(values)


@dataclass
class ExperimentConfig:
    """Parameters of a main-term reproduction run"""
    n: int = 2
    X_checkpoints: Tuple[int, ...] = (10**6, 10**7, 10**8)
    window: Tuple[str, ...] = ("1", "10")
    pmax: int = 1000
    case_filter: Tuple[int, ...] = (1,)
    seed: int = 0
    output_dir: str = "results"
    threads: int = 1
    extra: Dict[str, str] = field(default_factory=dict)

    _KEYS = {
        "N": "n", "CHECKPOINTS": "X_checkpoints", "WINDOW": "window",
        "PMAX": "pmax", "CASE": "case_filter", "SEED": "seed",
        "OUT": "output_dir", "THREADS": "threads",
    }

    @classmethod
    def from_sources(cls, file_values: Optional[Mapping[str, Optional[str]]] = None,
                     overrides: Optional[Mapping[str, Any]] = None,
                     settings: Optional[Settings] = None) -> "ExperimentConfig":
        """Merge a key=value file with flag overrides, then validate"""
        settings = settings or get_settings()
        config = cls()
        for key, raw in (file_values or {}).items():
            attr = cls._KEYS.get(key.upper())
            if attr is None:
                config.extra[key] = raw or ""
                logger.warning(f"Unknown experiment key {key!r} ignored")
                continue
            config._assign(attr, raw)
        for attr, value in (overrides or {}).items():
            if value is not None:
                config._assign(attr, value)
        config.validate(settings)
        return config

    @classmethod
    def load(cls, path: str, overrides: Optional[Mapping[str, Any]] = None,
             settings: Optional[Settings] = None) -> "ExperimentConfig":
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        return cls.from_sources(dotenv_values(path), overrides, settings)

    def _assign(self, attr: str, value: Any) -> None:
        if value is None:
            raise ConfigError(f"missing value for {attr}")
        try:
            if attr in ("n", "pmax", "seed", "threads"):
                setattr(self, attr, int(value))
            elif attr == "X_checkpoints":
                setattr(self, attr, parse_int_list(value) if isinstance(value, str) else tuple(int(v) for v in value))
            elif attr == "case_filter":
                setattr(self, attr, parse_int_list(value) if isinstance(value, str) else tuple(int(v) for v in value))
            elif attr == "window":
                parts = value.split(",") if isinstance(value, str) else list(value)
                setattr(self, attr, tuple(str(p).strip() for p in parts))
            else:
                setattr(self, attr, str(value))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {attr}: {value!r}") from exc

    def validate(self, settings: Settings) -> None:
        if not 1 <= self.n <= settings.max_n:
            raise ConfigError(f"n must be in [1, {settings.max_n}], got {self.n}")
        if not self.X_checkpoints:
            raise ConfigError("at least one checkpoint is required")
        if list(self.X_checkpoints) != sorted(self.X_checkpoints) or self.X_checkpoints[0] < 1:
            raise ConfigError(f"checkpoints must be positive and ascending: {self.X_checkpoints}")
        if self.pmax < 3:
            raise ConfigError(f"pmax must be at least 3, got {self.pmax}")
        if not set(self.case_filter) <= {1, 2, 3} or not self.case_filter:
            raise ConfigError(f"case filter must be drawn from 1, 2, 3: {self.case_filter}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        window = self.shape_window()
        if len(window.bounds) != (1 << self.n) - 2:
            raise ConfigError(f"window needs {(1 << self.n) - 2} bounds for n = {self.n}, got {len(window.bounds)}")

    def shape_window(self):
        try:
            from .integral_basis import ShapeWindow
            from .errors import InvalidInputError
        except ImportError:
            from integral_basis import ShapeWindow
            from errors import InvalidInputError
        try:
            return ShapeWindow.of(*self.window)
        except InvalidInputError as exc:
            raise ConfigError(f"bad window {','.join(self.window)}: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        result = asdict(self)
        result.pop("extra", None)
        return result
