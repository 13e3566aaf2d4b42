"""
Configuration settings for the spectral limit laboratory
"""
from typing import Tuple

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="LAB_", env_file=".env", case_sensitive=False)

    # Fourier oracles
    default_tol: float = Field(1e-10, gt=0)
    wiener_tol: float = Field(1e-12, gt=0)
    j_max: int = Field(64, ge=1)

    # Quadrature
    quadrature_node_budget: int = Field(2 ** 22, ge=1)
    max_quadrature_depth: int = Field(40, ge=1)
    pole_check_depth: int = Field(20, ge=1)
    pole_mass_limit: float = Field(1e-9, gt=0)
    laguerre_max_nodes: int = Field(512, ge=2)

    # Linear algebra
    contraction_tol: float = Field(1e-12, gt=0)
    rank_tol: float = Field(1e-9, gt=0)
    gram_floor: float = Field(1e-10, gt=0)
    sup_grid_points: int = Field(4096, ge=16)
    trig_density_min: float = -1e-9

    # Recurrence and scans
    recurrence_search_max: int = Field(4096, ge=1)
    nondecay_threshold: float = Field(0.25, gt=0)
    scan_windows: Tuple[int, int] = (4, 11)
    scan_points_per_window: int = Field(2048, ge=8)

    # Limit-space witnesses
    witness_max_window: int = Field(8, ge=1)
    witness_time_step: float = Field(0.25, gt=0)
    witness_residual_tol: float = Field(1e-8, gt=0)
    witness_laguerre_nodes: int = Field(256, ge=2)
    witness_extent_depth: int = Field(8, ge=1)
    witness_rule_depth: int = Field(10, ge=1)

    # Runtime
    n_jobs: int = 1
    float_format: str = "%.12e"
    log_level: str = "INFO"


settings = Settings()
