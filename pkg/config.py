from pydantic_settings import BaseSettings
from typing import Optional
import os

class Settings(BaseSettings):
    # Application
    APP_NAME: str = "mwu-lab"
    APP_VERSION: str = "1.0.0"

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("MWU_LAB_LOG_LEVEL", "WARNING")
    LOG_FILE: Optional[str] = os.getenv("MWU_LAB_LOG_FILE", None)

    # Parallelism
    THREADS: int = int(os.getenv("MWU_LAB_THREADS", "1"))
    SWEEP_EXECUTOR: str = os.getenv("MWU_LAB_EXECUTOR", "thread")

    # Parameter hygiene
    A_MAX: float = 1e4

    # Map core
    SCHWARZIAN_GRID_SIZE: int = 4096
    NEUTRAL_TOL: float = 1e-12

    # Diagonal dynamics
    INTERVAL_GRID_SIZE: int = 10_000
    INTERVAL_LADDER_MAX_K: int = 1000
    ENTRY_MAX_STEPS: int = 1_000_000
    CYCLE_GRID_SIZE: int = 20_000
    CYCLE_MAX_PERIOD: int = 20
    CHAOS_GRID_SIZE: int = 10_000
    THRESHOLD_TOL: float = 1e-3

    # Planar dynamics
    PLANAR_N_MAX: int = 1_000_000
    PLANAR_TOL: float = 1e-9
    CERTIFICATE_MAX_N: int = 10_000_000

    # Sweeps
    SWEEP_TRANSIENT: int = 10_000
    SWEEP_SAMPLES: int = 256

    class Config:
        env_file = ".env"
        case_sensitive = True

settings = Settings()

def validate_config():
    errors = []

    if settings.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"LOG_LEVEL must be a logging level name, got {settings.LOG_LEVEL!r}")

    if settings.THREADS < 1:
        errors.append("MWU_LAB_THREADS must be at least 1")

    if settings.SWEEP_EXECUTOR not in ("thread", "process"):
        errors.append("MWU_LAB_EXECUTOR must be 'thread' or 'process'")

    if settings.A_MAX <= 0:
        errors.append("A_MAX must be positive")

    if not 1 <= settings.CYCLE_MAX_PERIOD <= 20:
        errors.append("CYCLE_MAX_PERIOD must lie in [1, 20]")

    if not all([settings.SCHWARZIAN_GRID_SIZE > 0, settings.INTERVAL_GRID_SIZE > 0,
                settings.CYCLE_GRID_SIZE > 0, settings.CHAOS_GRID_SIZE > 0]):
        errors.append("Grid sizes must be positive")

    if errors:
        raise ValueError(f"Configuration errors: {', '.join(errors)}")

    return True

def get_config_summary():
    return {
        "app": {
            "name": settings.APP_NAME,
            "version": settings.APP_VERSION,
            "log_level": settings.LOG_LEVEL
        },
        "parallelism": {
            "threads": settings.THREADS,
            "executor": settings.SWEEP_EXECUTOR
        },
        "grids": {
            "schwarzian": settings.SCHWARZIAN_GRID_SIZE,
            "interval": settings.INTERVAL_GRID_SIZE,
            "cycles": settings.CYCLE_GRID_SIZE,
            "chaos": settings.CHAOS_GRID_SIZE
        },
        "limits": {
            "a_max": settings.A_MAX,
            "planar_n_max": settings.PLANAR_N_MAX,
            "certificate_max_n": settings.CERTIFICATE_MAX_N
        },
        "sweeps": {
            "transient": settings.SWEEP_TRANSIENT,
            "samples": settings.SWEEP_SAMPLES
        }
    }
