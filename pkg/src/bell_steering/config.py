"""
Configuration management for the Bell-diagonal steering toolkit.

This module provides configuration loading and validation using Pydantic models.
Every numerical default of the solvers, oracles and the verification harness
lives here; YAML and JSON files are supported, and CLI flags override them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, field_validator


class WeiszfeldSettings(BaseModel):
    """Fermat-Toricelli solver settings."""
    tol: float = Field(default=1e-11, gt=0.0, description="Bound on the gradient norm at the returned point")
    max_iter: int = Field(default=10_000, ge=1, description="Iteration cap")


class S3Settings(BaseModel):
    """Multi-start search for S3."""
    restarts: int = Field(default=32, ge=1, description="Random starts on top of the two structured ones")
    max_evaluations: int = Field(default=200, ge=10, description="Objective evaluations per start")
    inner_tol: float = Field(default=1e-10, gt=0.0, description="Weiszfeld tolerance inside the objective")


class OracleSettings(BaseModel):
    """Brute-force oracle settings."""
    penalty: float = Field(default=1e4, gt=0.0, description="Box penalty weight of the parent-POVM search")
    restarts: int = Field(default=64, ge=1, description="Starts of the parent-POVM search")
    patience: int = Field(default=3, ge=1, description="Parent-POVM starts without improvement before the search stops")
    tol: float = Field(default=1e-6, gt=0.0, description="Inconclusive band around the compatibility boundary")
    n_theta: int = Field(default=180, ge=8, description="Polar resolution of the S grid oracle")
    n_phi: int = Field(default=360, ge=8, description="Azimuthal resolution of the S grid oracle")


class VerificationSettings(BaseModel):
    """Tolerances of the inequality suite."""
    violation_tol: float = Field(default=1e-9, ge=0.0, description="Allowed signed slack of a bound")
    saturation_tol: float = Field(default=1e-10, ge=0.0, description="Allowed gap on saturating families")
    saturation_points: int = Field(default=101, ge=2, description="Parameter values per saturating family")


class ThresholdSettings(BaseModel):
    """Bisection settings for the Werner transitions."""
    xtol: float = Field(default=1e-9, gt=0.0)
    maxiter: int = Field(default=200, ge=1)


class SteeringConfig(BaseModel):
    """Main configuration model of the toolkit.

    Attributes:
        weiszfeld: Fermat-Toricelli solver settings
        s3: S3 search settings
        oracles: Brute-force oracle settings
        verification: Inequality suite tolerances
        thresholds: Werner threshold bisection settings
        workers: Process-pool size for sampling and verification (default: 1)
        seed: Default seed when a command is given none (default: 0)
    """

    weiszfeld: WeiszfeldSettings = Field(default_factory=WeiszfeldSettings)
    s3: S3Settings = Field(default_factory=S3Settings)
    oracles: OracleSettings = Field(default_factory=OracleSettings)
    verification: VerificationSettings = Field(default_factory=VerificationSettings)
    thresholds: ThresholdSettings = Field(default_factory=ThresholdSettings)
    workers: int = Field(default=1, ge=1, description="Number of parallel sampling workers")
    seed: Optional[int] = Field(default=0, description="Default random seed")

    @field_validator('seed')
    @classmethod
    def validate_seed(cls, v: Optional[int]) -> Optional[int]:
        """Seeds feed numpy SeedSequence and must be nonnegative."""
        if v is not None and v < 0:
            raise ValueError(f"seed must be nonnegative, got {v}")
        return v


def load_config(config_path: Path) -> SteeringConfig:
    """Load configuration from a YAML or JSON file.

    Args:
        config_path: Path to the configuration file (.yaml, .yml, or .json)

    Returns:
        Validated SteeringConfig instance; missing sections take their defaults

    Raises:
        FileNotFoundError: If config file does not exist
        ValueError: If config file is malformed or contains invalid data

    Examples:
        >>> config = load_config(Path("steering.yaml"))
        >>> print(config.s3.restarts)
    """
    config_path = Path(config_path).expanduser().resolve()

    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    try:
        text = config_path.read_text(encoding='utf-8')
    except Exception as e:
        raise ValueError(f"Failed to read config file {config_path}: {e}")

    # YAML is a superset of JSON
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ValueError(f"Invalid YAML in config file {config_path}: {e}")

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(
            f"Config file must contain a JSON/YAML object (dict), not {type(data).__name__}. "
            f"Found: {data}"
        )

    try:
        return SteeringConfig(**data)
    except Exception as e:
        raise ValueError(f"Invalid configuration in {config_path}: {e}")
