"""
Core configuration for the lab
"""
from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Process-wide settings"""

    # Application
    APP_NAME: str = "Single-Shot QML Lab"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = Field(default=False, env="DEBUG")

    # Server
    HOST: str = Field(default="0.0.0.0", env="HOST")
    PORT: int = Field(default=8000, env="PORT")

    # Run registry
    DATABASE_URL: str = Field(default="sqlite:///./lab_results.db", env="DATABASE_URL")
    PERSIST_RESULTS: bool = Field(default=True, env="PERSIST_RESULTS")

    # Experiment defaults
    OUTPUT_DIR: str = Field(default="runs", env="OUTPUT_DIR")
    DEFAULT_SEED: int = Field(default=0, env="DEFAULT_SEED")
    THREADS: int = Field(default=1, ge=1, env="THREADS")
    NOISE_TRAJECTORIES: int = Field(default=2000, ge=1, env="NOISE_TRAJECTORIES")

    # Memory guards
    MAX_STATEVECTOR_QUBITS: int = 20
    MAX_DENSITY_MATRIX_QUBITS: int = 6

    # API Configuration
    API_V1_PREFIX: str = "/api/v1"

    # CORS
    CORS_ORIGINS: list = ["*"]

    # Logging
    LOG_LEVEL: str = Field(default="INFO", env="LOG_LEVEL")

    class Config:
        env_file = ".env"
        case_sensitive = True


# Create settings instance
settings = Settings()
