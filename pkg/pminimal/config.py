"""
Configuration management for the p-minimal surface laboratory

Process-level defaults come from environment variables prefixed with
PMINIMAL_ (or a local .env file). Per-run parameters live in
pminimal.schemas.SuiteConfig.
"""

import logging
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Laboratory settings loaded from environment variables"""

    model_config = SettingsConfigDict(env_prefix="PMINIMAL_", env_file=".env", extra="ignore")

    # Application
    APP_NAME: str = "p-minimal surface laboratory"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"

    # Runs
    OUTPUT_DIR: str = "out"
    SEED: int = 20240601

    # Convex geometry
    CONTACT_TOL: float = 1e-6  # relative distance to the circumscribed sphere
    DIRECTION_GRID: int = 4096
    FAMILY_DIRECTIONS: int = 720

    # Gauss map check
    SLACK_CONSTANT: float = 10.0
    PLANAR_THRESHOLD: float = 1e-7
    PRECONDITION_THRESHOLD: float = 1e-3

    # Graph solver
    NEWTON_MAX_ITER: int = 60
    NEWTON_TOL: float = 1e-8
    CONTINUATION_STEP: float = 0.25
    NEWTON_REGULARIZATION: float = 1e-8

    # Profiles and tubes
    BLOWUP_FACTOR: float = 1e6
    RADIUS_CAP: float = 2.0

    @property
    def is_debug(self) -> bool:
        """Check if running with debug diagnostics"""
        return self.DEBUG or self.LOG_LEVEL.upper() == "DEBUG"

    def validate(self) -> bool:
        """Validate numerical configuration on startup"""
        warnings = []

        if self.DIRECTION_GRID < 256:
            warnings.append(
                f"DIRECTION_GRID={self.DIRECTION_GRID} is coarse; sigma estimates "
                "will overshoot the true minimum."
            )

        if self.NEWTON_TOL > 1e-6:
            warnings.append(
                f"NEWTON_TOL={self.NEWTON_TOL:g} is loose; solved graphs may fail "
                "the Gauss map precondition."
            )

        if not 0.0 < self.CONTINUATION_STEP <= 0.5:
            warnings.append(
                f"CONTINUATION_STEP={self.CONTINUATION_STEP:g} outside (0, 0.5]; "
                "Newton may leave its basin between exponents."
            )

        if self.CONTACT_TOL >= 1e-2:
            warnings.append(
                f"CONTACT_TOL={self.CONTACT_TOL:g} admits points far from the sphere "
                "into contact sets."
            )

        for warning in warnings:
            logger.warning(warning)

        return len(warnings) == 0


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    settings = Settings()
    settings.validate()  # Validate on first load
    return settings


# Global settings instance
settings = get_settings()
