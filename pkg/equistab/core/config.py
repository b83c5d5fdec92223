from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # App settings
    PROJECT_NAME: str = "equistab"
    VERSION: str = "0.1.0"

    # Runtime
    EQUISTAB_THREADS: int = 1
    LOG_LEVEL: str = "WARNING"
    ORBIT_DIR: str = "orbits"

    # Discretization defaults (problem files may override)
    DEFAULT_K: int = 32
    DEFAULT_F: int = 32
    DEFAULT_M: int = 256
    PERIOD_GRID: int = 512
    MIN_SEPARATION: float = 1e-6

    # Optimizer
    TOL_FIRST_ORDER: float = 1e-6
    TOL_NEWTON: float = 1e-10
    MAX_ITER: int = 2000

    # Floquet
    FLOQUET_STEPS: int = 8192
    STABILITY_TOL: float = 0.05

# Singleton pattern - single instance
settings = Settings()


def get_settings() -> Settings:
    """Accessor used by commands and tests instead of importing the singleton."""
    return settings
