"""
Configuration settings from environment variables
"""
import os
import logging
from typing import Optional
from dotenv import load_dotenv

# Load .env file
load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    """Application settings"""

    # Numerical defaults
    TOL: float = float(os.getenv('RINGWALK_TOL', '1e-12'))
    MAX_STEPS: int = int(os.getenv('RINGWALK_MAX_STEPS', '1000000'))
    P_GOAL: float = float(os.getenv('RINGWALK_PG', str(2.0 / 3.0)))
    PHASE_SAMPLES: int = int(os.getenv('RINGWALK_SAMPLES', '10000'))
    N_MAX: int = int(os.getenv('RINGWALK_NMAX', '200'))

    # Parallel sweeps
    THREADS: int = 1

    # Logging
    LOG_DIR: str = os.getenv('LOG_DIR', 'logs')

    # Run archive (disabled when unset)
    DB_PATH: Optional[str] = None

    @classmethod
    def load(cls):
        """Load settings from environment"""
        for attr, key, cast, default in (
            ('THREADS', 'RINGWALK_THREADS', int, '1'),
            ('TOL', 'RINGWALK_TOL', float, '1e-12'),
            ('MAX_STEPS', 'RINGWALK_MAX_STEPS', int, '1000000'),
            ('P_GOAL', 'RINGWALK_PG', float, str(2.0 / 3.0)),
            ('PHASE_SAMPLES', 'RINGWALK_SAMPLES', int, '10000'),
            ('N_MAX', 'RINGWALK_NMAX', int, '200'),
        ):
            raw = os.getenv(key) or default
            try:
                setattr(cls, attr, cast(raw))
            except ValueError:
                logger.error(f"{key} must be a number, got {raw!r}")
                setattr(cls, attr, cast(default))

        cls.LOG_DIR = os.getenv('LOG_DIR', 'logs')
        cls.DB_PATH = os.getenv('RINGWALK_DB_PATH') or None

        return cls

    @classmethod
    def get_numeric_defaults(cls) -> dict:
        """Get defaults for the [options] section of a run config"""
        return {
            'tol': cls.TOL,
            'max_steps': cls.MAX_STEPS,
            'p_g': cls.P_GOAL,
            'samples': cls.PHASE_SAMPLES,
            'n_max': cls.N_MAX,
            'threads': cls.THREADS,
        }

    @classmethod
    def validate(cls) -> tuple[bool, list[str]]:
        """Validate numeric settings"""
        errors = []

        if cls.THREADS < 1:
            errors.append("RINGWALK_THREADS must be at least 1")
        if not cls.TOL > 0:
            errors.append("RINGWALK_TOL must be positive")
        if cls.MAX_STEPS < 1:
            errors.append("RINGWALK_MAX_STEPS must be at least 1")
        if not 0 < cls.P_GOAL < 1:
            errors.append("RINGWALK_PG must lie strictly between 0 and 1")
        if cls.PHASE_SAMPLES < 2:
            errors.append("RINGWALK_SAMPLES must be at least 2")
        if cls.N_MAX < 1:
            errors.append("RINGWALK_NMAX must be at least 1")

        return len(errors) == 0, errors
