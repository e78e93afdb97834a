from pydantic_settings import BaseSettings
from pydantic import Field
from typing import Literal


class Settings(BaseSettings):
    app_name: str = Field(default="Shot-Frugal VQE Lab", alias="APP_NAME")
    env: str = Field(default="dev", alias="ENV")
    api_host: str = Field(default="127.0.0.1", alias="API_HOST")
    api_port: int = Field(default=8000, alias="API_PORT")

    # Logging: console always, timestamped file only when LOG_DIR is set
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(default="INFO", alias="LOG_LEVEL")
    log_dir: str | None = Field(default=None, alias="LOG_DIR")

    # Simulator
    max_dense_qubits: int = Field(default=12, alias="MAX_DENSE_QUBITS")

    # Prior-sigma regularizer
    sigma_min: float = Field(default=1e-6, alias="SIGMA_MIN")

    # Rosalin defaults (L and alpha default to M and 1/M per Hamiltonian)
    rosalin_mu: float = Field(default=0.99, alias="ROSALIN_MU")
    rosalin_bias: float = Field(default=1e-6, alias="ROSALIN_BIAS")
    rosalin_min_shots: int = Field(default=2, alias="ROSALIN_MIN_SHOTS")
    rosalin_shot_cap: int = Field(default=10_000, alias="ROSALIN_SHOT_CAP")

    # Adam baseline
    adam_step_size: float = Field(default=0.01, alias="ADAM_STEP_SIZE")
    adam_beta1: float = Field(default=0.9, alias="ADAM_BETA1")
    adam_beta2: float = Field(default=0.999, alias="ADAM_BETA2")
    adam_eps: float = Field(default=1e-8, alias="ADAM_EPS")
    adam_min_shots: int = Field(default=100, alias="ADAM_MIN_SHOTS")

    # Harness
    default_trials: int = Field(default=20, alias="DEFAULT_TRIALS")
    aggregate_points: int = Field(default=200, alias="AGGREGATE_POINTS")
    parallelism: int = Field(default=4, alias="PARALLELISM")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"


settings = Settings()
