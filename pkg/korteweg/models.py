"""Pydantic-модели манифеста прогона, конфигурации экспериментов и результатов подгонки."""

import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from korteweg.core.fields import ScalarField, VectorField
from korteweg.core.grid import Grid
from korteweg.services.besov import BesovParams
from korteweg.services.coefficients import (
    Coefficients,
    PolynomialLaw,
    density_profile,
    velocity_profile,
)
from korteweg.services.picard import PicardConfig


class DensitySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["constant", "bump", "cosine"] = "constant"
    amplitude: float = 0.0
    width: float = Field(0.5, gt=0)
    center: Optional[tuple[float, float]] = None


class VelocitySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["zero", "taylor_green", "shear", "random"] = "zero"
    amplitude: float = 0.0
    modes: int = Field(4, ge=1)
    seed: Optional[int] = None


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    picard_tol: float = Field(1e-8, gt=0)
    max_iters: int = Field(30, ge=1)
    inner_iterations: int = Field(1, ge=1)
    use_free_solution: bool = True
    epsilon0: float = Field(0.1, gt=0)
    smallness_c: float = Field(0.5, gt=0)


class RunManifest(BaseModel):
    """Манифест одного прогона (JSON)."""

    model_config = ConfigDict(extra="forbid")

    grid: int = 64
    dt: float = Field(1e-3, gt=0)
    T: float = Field(0.1, gt=0)
    mu_bar: float = Field(1.0, gt=0)
    kappa_bar: float = Field(0.0, ge=0)
    # коэффициенты c_m в f(ρ) = 1 + Σ c_m (ρ−1)^m
    mu_fn: list[float] = Field(default_factory=list)
    k_fn: list[float] = Field(default_factory=list)
    rho0: DensitySpec = Field(default_factory=DensitySpec)
    u0: VelocitySpec = Field(default_factory=VelocitySpec)
    route: Literal["general", "small_density"] = "general"
    stepper: Literal["imex1", "cnab2"] = "imex1"
    solver: Literal["lagrangian", "eulerian"] = "lagrangian"
    tolerances: Tolerances = Field(default_factory=Tolerances)
    besov_p: float = Field(2.0, ge=1)
    rho_floor: float = Field(0.1, gt=0)
    seed: int = Field(0, ge=0)

    @field_validator("grid")
    @classmethod
    def _grid_size(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"grid must be a power of two >= 8, got {value}")
        return value

    @model_validator(mode="after")
    def _whole_number_of_steps(self) -> "RunManifest":
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError(f"T={self.T} is not a whole number of steps dt={self.dt}")
        return self

    @property
    def n_steps(self) -> int:
        return max(1, round(self.T / self.dt))

    def make_grid(self) -> Grid:
        return Grid(n_points=self.grid)

    def initial_density(self) -> ScalarField:
        spec = self.rho0
        return density_profile(self.make_grid(), spec.kind, spec.amplitude, spec.width, spec.center)

    def initial_velocity(self) -> VectorField:
        spec = self.u0
        seed = spec.seed if spec.seed is not None else self.seed
        return velocity_profile(self.make_grid(), spec.kind, spec.amplitude, spec.modes, seed)

    def coefficients(self, kappa_bar: Optional[float] = None) -> Coefficients:
        return Coefficients(
            mu_bar=self.mu_bar,
            kappa_bar=self.kappa_bar if kappa_bar is None else kappa_bar,
            rho0=self.initial_density(),
            mu_fn=PolynomialLaw(tuple(self.mu_fn)),
            k_fn=PolynomialLaw(tuple(self.k_fn)),
            rho_floor=self.rho_floor,
        )

    def picard_config(self) -> PicardConfig:
        tol = self.tolerances
        return PicardConfig(
            tol=tol.picard_tol,
            max_iters=tol.max_iters,
            inner_iterations=tol.inner_iterations,
            use_free_solution=tol.use_free_solution,
            epsilon0=tol.epsilon0,
            smallness_c=tol.smallness_c,
            besov_p=self.besov_p,
            stepper=self.stepper,
        )


class ExperimentConfig(RunManifest):
    """Манифест плюс параметры свипа по κ̄ и анализа."""

    sweep: list[float] = Field(default_factory=list)
    alpha_targets: list[float] = Field(default_factory=lambda: [1.0])
    epsilon: float = Field(0.05, gt=0)
    # горизонт и число шагов lifespan-study для первого (наибольшего) κ̄;
    # для остальных горизонт растёт как 1/κ̄
    lifespan_horizon: float = Field(1.0, gt=0)
    lifespan_steps: int = Field(200, ge=2)
    output_dir: Optional[Path] = None
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv"])
    # lp-analyze
    snapshot: Optional[Path] = None
    besov_s: float = 0.0
    besov_r: float = Field(1.0, ge=1)

    @field_validator("sweep")
    @classmethod
    def _decreasing_decade(cls, values: list[float]) -> list[float]:
        if not values:
            return values
        if any(v <= 0 for v in values):
            raise ValueError("sweep values must be positive")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly decreasing")
        if values[0] / values[-1] < 10.0 * (1.0 - 1e-12):
            raise ValueError("sweep must span at least one decade")
        return values

    def besov_params(self) -> BesovParams:
        return BesovParams(s=self.besov_s, p=self.besov_p, r=self.besov_r)


class FitResult(BaseModel):
    """Результат МНК по (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float = Field(ge=0.0, le=1.0)
    points: list[tuple[float, float]]

    @field_validator("points")
    @classmethod
    def _enough_points(cls, values: list[tuple[float, float]]) -> list[tuple[float, float]]:
        if len(values) < 3:
            raise ValueError("a fit needs at least 3 points")
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in values):
            raise ValueError("fit points must be finite")
        return values
