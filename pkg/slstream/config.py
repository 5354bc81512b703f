from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """
    Library and CLI defaults loaded from environment variables.
    Every variable is read with the ``SLS_`` prefix (``SLS_LOG_LEVEL`` etc.).
    """

    # Reproducibility
    DEFAULT_SEED: int = 20240101

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"

    # Numerical tolerances
    STABILITY_TOL: float = 1e-6
    PINV_RTOL: float = 1e-12
    PRECISION_RTOL: float = 1e-10
    SIGMA_DENOMINATOR: str = "n_minus_p"  # or "n"

    # Pilot
    P_MAX: int = 6

    # Simulation
    BURN_IN_STABLE: int = 500

    # Sampler
    MAX_BLOCK_LEN: int = 1_000_000
    RNG_CHUNK: int = 4096

    # Monitor
    ALARM_ALPHA: float = 1e-3

    # Benchmark harness
    BENCH_WORKERS: int = 1
    STREAM_CAP_FACTOR: int = 50
    STREAM_CAP_MIN: int = 1_000_000

    model_config = SettingsConfigDict(
        env_prefix="SLS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    @property
    def is_json_logging(self) -> bool:
        """Check if log lines should be rendered as JSON."""
        return self.LOG_FORMAT.lower() == "json"

    @property
    def uses_unbiased_sigma(self) -> bool:
        """Residual variance divides by n - p instead of n."""
        return self.SIGMA_DENOMINATOR.lower() != "n"

    def stream_cap(self, threshold_c: float) -> int:
        """Per-replicate cap on generated samples for a given threshold."""
        return int(max(self.STREAM_CAP_FACTOR * threshold_c, self.STREAM_CAP_MIN))


@lru_cache()
def get_settings() -> Settings:
    """
    Create and cache settings instance.
    Uses lru_cache to ensure settings are loaded only once.
    """
    return Settings()


# Convenience instance for direct imports
settings = get_settings()
