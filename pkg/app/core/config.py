# app/core/config.py
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv(override=True)

BUNDLED_SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "Quaternionic Dynamics Verification Harness"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_FILE: Optional[Path] = None

    # Physics defaults (scenarios override through SimulationConfig)
    HBAR: float = 1.0
    MASS: float = 1.0
    STABILITY_SAFETY: float = 0.2

    # Tolerances
    TOL_ALGEBRAIC: float = 1e-12
    TOL_DYNAMICAL: float = 1e-6
    TOL_CONTINUITY_POINTWISE: float = 2e-2
    TOL_EXPECTATION_RESIDUE: float = 1e-14
    TOL_HERMITIAN: float = 1e-7
    TOL_HERMITICITY_DEFECT: float = 1e-10
    TOL_FORMS: float = 1e-8
    TOL_ORACLE: float = 1e-8
    TOL_STATIONARITY: float = 1e-8

    # Batch runner
    SCENARIO_DIR: Path = BUNDLED_SCENARIO_DIR
    OUTPUT_DIR: Path = Path("results")
    MAX_WORKERS: int = 4
    RANDOM_SEED: int = 20170101

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="allow",
    )


settings = Settings()
