"""config.py
Runtime settings read from the environment (and a local .env file if present).
"""
from __future__ import annotations

import os
import logging
from typing import Optional

from dotenv import load_dotenv

from .errors import ParameterError

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

DEFAULT_PORT = 4529
DEFAULT_KEY_LEN = 8
DEFAULT_SEARCH_CAP = 10_000_000


def _env_int(name: str, default: Optional[int] = None) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ParameterError(f"{name} must be an integer, got {raw!r}") from None


class DSKEConfig:
    """Settings from DSKE_* environment variables; CLI flags override these."""

    def __init__(self) -> None:
        # Layer-1 secret (optional, flags may supply it instead)
        self.p = _env_int('DSKE_P')
        self.q = _env_int('DSKE_Q')
        self.n = _env_int('DSKE_N')

        # Transport
        self.addr = os.getenv('DSKE_ADDR', '127.0.0.1')
        self.port = _env_int('DSKE_PORT', DEFAULT_PORT)
        try:
            self.timeout = float(os.getenv('DSKE_TIMEOUT', '10'))
        except ValueError:
            raise ParameterError("DSKE_TIMEOUT must be a number") from None

        # Session / analysis
        self.key_len = _env_int('DSKE_KEY_LEN', DEFAULT_KEY_LEN)
        self.search_cap = _env_int('DSKE_SEARCH_CAP', DEFAULT_SEARCH_CAP)

        self.log_level = os.getenv('DSKE_LOG_LEVEL', 'WARNING').upper()
