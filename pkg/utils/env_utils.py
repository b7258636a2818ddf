"""Environment utilities for configuration management"""

import os
from dataclasses import dataclass
from typing import Dict, List, Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class EngineConfig:
    """Integration defaults resolved from the environment"""

    seed: int = 0
    workers: int = 1
    max_attempts: int = 5
    log_level: str = "WARNING"
    progress: bool = False


def load_env() -> None:
    """Load environment variables from .env file"""
    load_dotenv()


def check_env_vars(optional_vars: List[str]) -> Dict[str, str]:
    """
    Collect the environment variables that are set and non-empty

    Args:
        optional_vars: Variable names to look up

    Returns:
        Dictionary of the variables that have a value
    """
    env_dict = {}
    for var in optional_vars:
        value = os.getenv(var)
        if value:
            env_dict[var] = value.strip()
    return env_dict


def _read_int(env: Dict[str, str], var: str, default: int, minimum: Optional[int] = None) -> int:
    if var not in env:
        return default
    try:
        value = int(env[var])
    except ValueError:
        raise ValueError(f"Environment variable {var} must be an integer, got {env[var]!r}")
    if minimum is not None and value < minimum:
        raise ValueError(f"Environment variable {var} must be >= {minimum}, got {value}")
    return value


def get_engine_config() -> EngineConfig:
    """Get integration settings from TORICGW_* environment variables"""
    env = check_env_vars([
        'TORICGW_SEED', 'TORICGW_WORKERS', 'TORICGW_MAX_ATTEMPTS',
        'TORICGW_LOG_LEVEL', 'TORICGW_PROGRESS',
    ])

    log_level = env.get('TORICGW_LOG_LEVEL', 'WARNING').upper()
    if log_level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        raise ValueError(f"Environment variable TORICGW_LOG_LEVEL is not a logging level: {log_level!r}")

    return EngineConfig(
        seed=_read_int(env, 'TORICGW_SEED', 0),
        workers=_read_int(env, 'TORICGW_WORKERS', 1, minimum=1),
        max_attempts=_read_int(env, 'TORICGW_MAX_ATTEMPTS', 5, minimum=1),
        log_level=log_level,
        progress=env.get('TORICGW_PROGRESS', '').lower() in ('1', 'true', 'yes', 'on'),
    )
