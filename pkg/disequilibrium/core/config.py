from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="DISEQ_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: str = "INFO"

    # Thread pool size for panel blocks and sweep rows (output never depends on it)
    workers: int = 1

    # Fixed-point iteration of the variance recursion
    fixed_point_tol: float = 1e-12
    fixed_point_max_iter: int = 1_000_000

    # Sweep progress is logged every N finished rows
    progress_every: int = 10


settings = Settings()
