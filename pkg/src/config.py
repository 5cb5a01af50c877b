"""
Configuration management for hardcore-lab.
"""
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="HARDCORE_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Randomness Configuration
    seed: Optional[int] = Field(default=None, description="Root seed fallback when --seed is absent")

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Logging level")
    log_json: bool = Field(default=False, description="Render log events as JSON lines")

    # Oracle Configuration
    oracle_subproblem_cap: int = Field(default=2_000_000, description="Memo budget of the deletion recursion")
    oracle_enumeration_cap: int = Field(default=25, description="Vertex cap for full Gibbs tables")
    kernel_state_cap: int = Field(default=65536, description="State-space cap for exact Glauber kernels")

    # Graph Generation
    regular_attempts: int = Field(default=10_000, description="Pairing attempts before giving up")

    # Belief Propagation
    bp_tol: float = Field(default=1e-10, description="Fixed-point tolerance in the Psi metric")
    bp_max_iter: int = Field(default=10_000, description="Fixed-point iteration cap")
    default_delta: float = Field(default=0.2, description="Slack from criticality")

    # Partition Function Estimator
    z_sample_constant: float = Field(default=64.0, description="Sample-size constant C of the telescoping estimator")
    z_floor: float = Field(default=1e-6, description="Degenerate factor floor")

    # Performance Configuration
    jobs: int = Field(default=1, description="Replicate worker processes")

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.upper()

    @field_validator("jobs", "oracle_subproblem_cap", "oracle_enumeration_cap", "kernel_state_cap", "regular_attempts", "bp_max_iter")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value


# Global settings instance
settings = Settings()
