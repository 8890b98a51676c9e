"""Configuration shared by the checking engines and the CLI."""
import os
from dataclasses import dataclass, field, asdict
from typing import Any, Dict

DEFAULT_HORIZON = 6
DEFAULT_TOL = 1e-8
THREADS_ENV_VAR = "LU_EQUIV_THREADS"
BOUNDS = ("laffey", "pearcy", "square")


def threads_from_env(default: int = 1) -> int:
    """
    Read the engine thread cap from LU_EQUIV_THREADS.
    Invalid values fall back to `default` with a warning.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        print(f"Warning: ignoring {THREADS_ENV_VAR}={raw!r}, expected a positive integer")
        return default
    if value < 1:
        print(f"Warning: ignoring {THREADS_ENV_VAR}={raw!r}, expected a positive integer")
        return default
    return value


@dataclass
class CheckConfig:
    horizon: int = DEFAULT_HORIZON
    tol: float = DEFAULT_TOL
    battery: int = 1
    rank_threshold: float = 1e-8
    full_sweep: bool = False
    threads: int = field(default_factory=threads_from_env)
    chunk_size: int = 4096
    bound: str = "square"
    debug: bool = False

    def __post_init__(self):
        """Validate check configuration"""
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.battery not in (1, 2):
            raise ValueError("battery must be 1 or 2")
        if not 0 < self.rank_threshold < 1:
            raise ValueError("rank_threshold must be between 0 and 1")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")
        if self.bound not in BOUNDS:
            raise ValueError(f"bound must be one of {', '.join(BOUNDS)}")

    def to_dict(self) -> Dict[str, Any]:
        """Fields echoed into reports, without `debug` and `threads`."""
        data = asdict(self)
        data.pop("debug")
        data.pop("threads")
        return data
