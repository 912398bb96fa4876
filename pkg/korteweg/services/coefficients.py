"""Коэффициенты системы (μ̄, κ̄, законы μ(ρ), k(ρ), ρ₀) и профили начальных данных."""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal, Optional, Sequence

import numpy as np

from korteweg.core.fields import ScalarField, VectorField, random_band_limited
from korteweg.core.grid import Grid
from korteweg.core.operators import differentiate, leray_project
from korteweg.errors import DensityBoundError, OutOfRangeError
from korteweg.services.lagrangian import apply_law, check_density_floor, reciprocal

logger = logging.getLogger(__name__)

DensityKind = Literal["constant", "bump", "cosine"]
VelocityKind = Literal["zero", "taylor_green", "shear", "random"]


@dataclass(frozen=True)
class PolynomialLaw:
    """f(ρ) = 1 + Σ_m c_m (ρ−1)^m, m = 1..len(c); f(1) = 1 по построению."""

    coefficients: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        x = np.asarray(rho, dtype=float) - 1.0
        out = np.ones_like(x)
        power = np.ones_like(x)
        for c in self.coefficients:
            power = power * x
            out = out + c * power
        return out


@dataclass(frozen=True)
class Coefficients:
    mu_bar: float
    kappa_bar: float
    rho0: ScalarField
    mu_fn: PolynomialLaw = PolynomialLaw()
    k_fn: PolynomialLaw = PolynomialLaw()
    rho_floor: float = 0.1

    def __post_init__(self) -> None:
        if self.mu_bar <= 0:
            raise OutOfRangeError(f"mu_bar must be positive, got {self.mu_bar}")
        if self.kappa_bar < 0:
            raise OutOfRangeError(f"kappa_bar must be nonnegative, got {self.kappa_bar}")
        if self.rho_floor <= 0:
            raise OutOfRangeError(f"rho_floor must be positive, got {self.rho_floor}")
        check_density_floor(self.rho0, self.rho_floor)
        for name, law in (("mu_fn", self.mu_fn), ("k_fn", self.k_fn)):
            value = float(law(np.array(1.0)))
            if value != 1.0:
                raise OutOfRangeError(f"{name}(1) must equal 1, got {value}")
        mu_min = float(np.min(self.mu_fn(self.rho0.values)))
        if mu_min <= 0:
            raise DensityBoundError(f"viscosity law is nonpositive on the range of rho0 (min {mu_min:.4g})")

    @property
    def grid(self) -> Grid:
        return self.rho0.grid

    @property
    def kappa_over_mu2(self) -> float:
        """κ = κ̄/μ̄² — капиллярность в системе с единичной вязкостью."""
        return self.kappa_bar / self.mu_bar**2

    @cached_property
    def inv_rho0(self) -> ScalarField:
        return reciprocal(self.rho0)

    @cached_property
    def mu_rho0(self) -> ScalarField:
        return apply_law(self.mu_fn, self.rho0)

    @cached_property
    def k_rho0(self) -> ScalarField:
        return apply_law(self.k_fn, self.rho0)

    @cached_property
    def grad_rho0(self) -> VectorField:
        return differentiate(self.rho0, "gradient")

    def with_kappa(self, kappa_bar: float) -> "Coefficients":
        return replace(self, kappa_bar=kappa_bar)

    def with_density(self, rho: ScalarField) -> "Coefficients":
        """Те же законы для текущей эйлеровой плотности; допускается спуск до rho_floor/2."""
        return replace(self, rho0=rho, rho_floor=self.rho_floor / 2.0)


def density_profile(
    grid: Grid,
    kind: DensityKind = "constant",
    amplitude: float = 0.0,
    width: float = 0.5,
    center: Optional[Sequence[float]] = None,
) -> ScalarField:
    """ρ₀ = 1 + amplitude·профиль.

    bump: гауссиан по периодическому расстоянию 2·sin((x−c)/2), гладкий на торе;
    cosine: cos(x₁)·cos(x₂).
    """
    if kind == "constant":
        return ScalarField.constant(grid, 1.0 + amplitude)
    if kind == "bump":
        if width <= 0:
            raise OutOfRangeError(f"bump width must be positive, got {width}")
        c = tuple(center) if center is not None else (math.pi,) * grid.dim

        def bump(*x: np.ndarray) -> np.ndarray:
            r2 = sum((2.0 * np.sin((xi - ci) / 2.0)) ** 2 for xi, ci in zip(x, c))
            return 1.0 + amplitude * np.exp(-r2 / (2.0 * width**2))

        return ScalarField.from_function(grid, bump)
    if kind == "cosine":
        return ScalarField.from_function(grid, lambda x, y: 1.0 + amplitude * np.cos(x) * np.cos(y))
    raise OutOfRangeError(f"unknown density profile: {kind}")


def velocity_profile(
    grid: Grid,
    kind: VelocityKind = "zero",
    amplitude: float = 0.0,
    modes: int = 4,
    seed: int = 0,
) -> VectorField:
    """Бездивергентная начальная скорость."""
    if kind == "zero":
        return VectorField.zeros(grid)
    if kind == "taylor_green":
        return VectorField.from_functions(
            grid,
            lambda x, y: amplitude * np.sin(x) * np.cos(y),
            lambda x, y: -amplitude * np.cos(x) * np.sin(y),
        )
    if kind == "shear":
        return VectorField.from_functions(grid, lambda x, y: amplitude * np.sin(y), lambda x, y: 0.0 * x)
    if kind == "random":
        rng = np.random.default_rng(seed)
        raw = random_band_limited(grid, rng, rank=1, max_mode=modes, amplitude=1.0)
        solenoidal, _ = leray_project(raw)
        scale = solenoidal.max_abs()
        if scale == 0.0:
            return solenoidal
        return solenoidal * (amplitude / scale)
    raise OutOfRangeError(f"unknown velocity profile: {kind}")
