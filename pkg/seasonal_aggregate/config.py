"""
Configuration management for seasonal-aggregate runs.
Reads defaults from environment variables and .env file, then layers a
key-value config file and command-line flags on top.
"""

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .errors import InputError
from .model import (
    DiffOrders,
    ModelOrders,
    ModelParams,
    SeasonalSpec,
    SpectrumConfig,
    format_scalar,
    model_orders_from_kv,
    params_from_kv,
    params_to_kv,
    parse_value,
    spec_from_kv,
)


# Auto-load .env file when module is imported
def _load_dotenv():
    """Load .env file from the package root directory."""
    try:
        package_root = Path(__file__).parent.parent
        env_file = package_root / ".env"

        if env_file.exists():
            with open(env_file, 'r', encoding='utf-8') as f:
                for line in f:
                    line = line.strip()
                    if not line or line.startswith('#'):
                        continue

                    if '=' in line:
                        key, value = line.split('=', 1)
                        key = key.strip()
                        value = _strip_quotes(value.strip())

                        # Environment variables take precedence
                        if key and not os.getenv(key):
                            os.environ[key] = value
    except Exception:
        # Fall back to system env vars
        pass


def _strip_quotes(value: str) -> str:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in ('"', "'"):
        return value[1:-1]
    return value


_load_dotenv()


_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def _env_int(name: str, default: int) -> Any:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return raw


def _env_bool(name: str, default: bool) -> Any:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    if raw.lower() in _TRUE:
        return True
    if raw.lower() in _FALSE:
        return False
    return raw


class Config:
    """Run defaults from SAGG_* environment variables."""

    def __init__(self):
        self.seed = _env_int("SAGG_SEED", 0)
        self.threads = _env_int("SAGG_THREADS", 1)
        self.truncation = _env_int("SAGG_TRUNCATION", 50)
        self.tail_correction = _env_bool("SAGG_TAIL_CORRECTION", True)
        self.grid_size = _env_int("SAGG_GRID_SIZE", 2 ** 20)
        self.max_order = _env_int("SAGG_MAX_ORDER", 2)
        self.history_cap = _env_int("SAGG_HISTORY_CAP", 4096)

    def validate(self) -> Tuple[bool, Optional[str]]:
        """
        Validate that all settings parse and lie in range.

        Returns:
            Tuple of (is_valid, error_message)
        """
        checks = [
            ("SAGG_SEED", self.seed, 0),
            ("SAGG_THREADS", self.threads, 1),
            ("SAGG_TRUNCATION", self.truncation, 1),
            ("SAGG_GRID_SIZE", self.grid_size, 8),
            ("SAGG_MAX_ORDER", self.max_order, 0),
            ("SAGG_HISTORY_CAP", self.history_cap, 16),
        ]
        for name, value, minimum in checks:
            if not isinstance(value, int):
                return False, f"{name} must be an integer, got {value!r}"
            if value < minimum:
                return False, f"{name} must be >= {minimum}, got {value}"

        if not isinstance(self.tail_correction, bool):
            return False, f"SAGG_TAIL_CORRECTION must be true or false, got {self.tail_correction!r}"

        return True, None

    def spectrum_config(self) -> SpectrumConfig:
        return SpectrumConfig(M=self.truncation, tail_correction=self.tail_correction, grid_size=self.grid_size)

    def __repr__(self) -> str:
        return (
            f"Config(seed={self.seed}, threads={self.threads}, "
            f"M={self.truncation}, tail_correction={self.tail_correction}, "
            f"K={self.max_order})"
        )


def get_config() -> Config:
    """
    Get validated configuration.

    Returns:
        Config instance

    Raises:
        InputError: If configuration is invalid
    """
    config = Config()
    is_valid, error_message = config.validate()

    if not is_valid:
        raise InputError(
            f"Invalid configuration: {error_message}\n"
            "Supported environment variables:\n"
            "  - SAGG_SEED, SAGG_THREADS, SAGG_TRUNCATION, SAGG_TAIL_CORRECTION\n"
            "  - SAGG_GRID_SIZE, SAGG_MAX_ORDER, SAGG_HISTORY_CAP"
        )

    return config


# ---------------------------------------------------------------------------
# Key-value files and layered run configuration
# ---------------------------------------------------------------------------

def parse_kv_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """
    Parse ``key=value`` lines; blank lines and ``#`` comments are skipped.

    Raises:
        InputError: On a line without ``=`` (reported with its line number)
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise InputError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split('=', 1)
        key = key.strip()
        if not key:
            raise InputError(f"{source}:{lineno}: empty key")
        values[key] = _strip_quotes(value.strip())
    return values


def read_kv_file(path: str) -> Dict[str, str]:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    return parse_kv_text(text, source=str(path))


# Keys that never enter the configuration hash
_UNHASHED = {"threads", "input", "output", "config", "verbose"}


@dataclass
class RunConfig:
    """
    Everything one subcommand run needs.

    Values come from ``Config`` defaults, then the key-value config file,
    then command-line flags.
    """

    subcommand: str = ""
    input: Optional[str] = None
    output: Optional[str] = None
    spec: SeasonalSpec = field(default_factory=SeasonalSpec)
    params: ModelParams = field(default_factory=ModelParams)
    orders: ModelOrders = field(default_factory=ModelOrders)
    max_order: int = 2
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    seed: int = 0
    threads: int = 1
    replicates: int = 200
    history_cap: int = 4096
    log_transform: bool = False
    window_seconds: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.max_order

    def diff_bounds(self) -> DiffOrders:
        return DiffOrders(self.max_order, (self.max_order,) * self.spec.c, self.max_order)

    def canonical_items(self) -> List[Tuple[str, str]]:
        """Sorted key/value rendering of every setting that affects results."""
        items = {
            "subcommand": self.subcommand,
            "z": format_scalar(list(self.spec.z)),
            "m": format_scalar(self.spec.m) if self.spec.m is not None else "none",
            "K": str(self.max_order),
            "M": str(self.spectrum.M),
            "tail_correction": format_scalar(self.spectrum.tail_correction),
            "grid_size": str(self.spectrum.grid_size),
            "seed": str(self.seed),
            "replicates": str(self.replicates),
            "history_cap": str(self.history_cap),
            "log_transform": format_scalar(self.log_transform),
            "window_seconds": format_scalar(self.window_seconds),
            "ar_order": format_scalar(list(self.orders.P)),
            "ma_order": format_scalar(list(self.orders.Q)),
            "p": str(self.orders.p),
            "q": str(self.orders.q),
        }
        items.update({f"param.{k}": v for k, v in params_to_kv(self.params)})
        items.update({k: format_scalar(v) for k, v in self.extra.items() if k not in _UNHASHED})
        return sorted(items.items())

    def config_hash(self) -> str:
        """SHA-256 of the canonical rendering (thread count and paths excluded)."""
        text = "\n".join(f"{k}={v}" for k, v in self.canonical_items())
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def build_run_config(
    subcommand: str,
    file_values: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Config] = None,
) -> RunConfig:
    """
    Layer defaults, config-file values and flag overrides into a RunConfig.

    Args:
        subcommand: Subcommand name
        file_values: Parsed config file (strings as read)
        overrides: Flag values; entries set to None are ignored
        defaults: Environment defaults (read via get_config() when omitted)

    Returns:
        RunConfig

    Raises:
        InputError: If any layer holds an invalid value
    """
    defaults = defaults or get_config()
    merged: Dict[str, Any] = {}
    for key, value in (file_values or {}).items():
        merged[key] = parse_value(value) if isinstance(value, str) else value
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    def take(key: str, default: Any, cast=int) -> Any:
        value = merged.pop(key, default)
        try:
            return cast(value) if value is not None else None
        except (TypeError, ValueError) as e:
            raise InputError(f"invalid value for {key}: {value!r}") from e

    spec = spec_from_kv({k: merged.pop(k) for k in ("z", "m") if k in merged})
    param_keys = [k for k in merged if k in ("d", "sigma2", "phi", "theta") or k.split(".")[0] in ("D", "ar", "ma")]
    params = params_from_kv({k: merged.pop(k) for k in param_keys}, c=spec.c)
    order_keys = [k for k in merged if k in ("p", "q") or k.split(".")[0] in ("ar_order", "ma_order")]
    orders = model_orders_from_kv({k: merged.pop(k) for k in order_keys}, c=spec.c)

    spectrum = SpectrumConfig(
        M=take("M", defaults.truncation),
        tail_correction=take("tail_correction", defaults.tail_correction, cast=_as_bool),
        grid_size=take("grid_size", defaults.grid_size),
    )
    run = RunConfig(
        subcommand=subcommand,
        input=take("input", None, cast=str),
        output=take("output", None, cast=str),
        spec=spec,
        params=params,
        orders=orders,
        max_order=take("K", defaults.max_order),
        spectrum=spectrum,
        seed=take("seed", defaults.seed),
        threads=take("threads", defaults.threads),
        replicates=take("replicates", 200),
        history_cap=take("history_cap", defaults.history_cap),
        log_transform=take("log_transform", False, cast=_as_bool),
        window_seconds=take("window_seconds", None, cast=float),
    )
    merged.pop("config", None)
    merged.pop("verbose", None)
    run.extra = merged

    if run.threads < 1:
        raise InputError(f"threads must be >= 1, got {run.threads}")
    if run.seed < 0:
        raise InputError(f"seed must be >= 0, got {run.seed}")
    if run.max_order < 0:
        raise InputError(f"K must be >= 0, got {run.max_order}")
    return run


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(value)
