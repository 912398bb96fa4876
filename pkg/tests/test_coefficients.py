"""Unit-тесты коэффициентов системы и профилей начальных данных."""

import numpy as np
import pytest

from korteweg.core.fields import ScalarField
from korteweg.core.grid import Grid
from korteweg.core.operators import differentiate
from korteweg.errors import DensityBoundError, OutOfRangeError
from korteweg.services.coefficients import (
    Coefficients,
    PolynomialLaw,
    density_profile,
    velocity_profile,
)


@pytest.fixture
def grid():
    return Grid(n_points=16)


def test_polynomial_law_values():
    """f(ρ) = 1 + 2(ρ−1) + (ρ−1)²."""
    law = PolynomialLaw((2.0, 1.0))
    assert float(law(np.array(2.0))) == 4.0
    assert float(law(np.array(1.0))) == 1.0


def test_kappa_over_mu_squared(grid):
    """κ = κ̄/μ̄²."""
    coeffs = Coefficients(mu_bar=2.0, kappa_bar=0.5, rho0=ScalarField.constant(grid, 1.0))
    assert coeffs.kappa_over_mu2 == 0.125
    assert coeffs.with_kappa(1.0).kappa_over_mu2 == 0.25


@pytest.mark.parametrize("mu_bar, kappa_bar", [(0.0, 0.1), (-1.0, 0.1), (1.0, -0.1)])
def test_invalid_scalars(grid, mu_bar, kappa_bar):
    """μ̄ ≤ 0 или κ̄ < 0."""
    with pytest.raises(OutOfRangeError):
        Coefficients(mu_bar=mu_bar, kappa_bar=kappa_bar, rho0=ScalarField.constant(grid, 1.0))


def test_density_below_floor(grid):
    """ρ₀ ниже порога положительности."""
    with pytest.raises(DensityBoundError):
        Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 0.05))


def test_viscosity_law_must_stay_positive(grid):
    """μ(ρ₀) ≤ 0 где-то на диапазоне плотности."""
    rho = density_profile(grid, "cosine", amplitude=0.5)
    with pytest.raises(DensityBoundError):
        Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=rho, mu_fn=PolynomialLaw((-10.0,)))


def test_with_density_relaxes_floor(grid):
    """Текущая плотность допускает спуск до половины порога."""
    coeffs = Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 1.0))
    moved = coeffs.with_density(ScalarField.constant(grid, 0.07))
    assert moved.rho_floor == pytest.approx(0.05)


def test_bump_profile_peak(grid):
    """Гауссиан с центром в (π, π) достигает 1 + amplitude в центре."""
    rho = density_profile(grid, "bump", amplitude=0.3, width=0.5)
    assert rho.values[8, 8] == pytest.approx(1.3)
    assert rho.values.min() > 1.0


def test_cosine_profile_range(grid):
    """1 + a·cos x·cos y лежит в [1 − a, 1 + a]."""
    rho = density_profile(grid, "cosine", amplitude=0.2)
    assert rho.values.min() == pytest.approx(0.8)
    assert rho.values.max() == pytest.approx(1.2)


@pytest.mark.parametrize("kind", ["taylor_green", "shear", "random"])
def test_velocity_profiles_are_solenoidal(grid, kind):
    """Все профили скорости бездивергентны."""
    u = velocity_profile(grid, kind, amplitude=0.5, modes=3, seed=1)
    assert differentiate(u, "divergence").max_abs() < 1e-12
    assert u.max_abs() == pytest.approx(0.5)


def test_random_profile_is_reproducible(grid):
    """Одинаковый seed — одинаковое поле."""
    a = velocity_profile(grid, "random", amplitude=1.0, seed=5)
    b = velocity_profile(grid, "random", amplitude=1.0, seed=5)
    assert np.array_equal(a.values, b.values)


def test_unknown_profile(grid):
    """Неизвестный вид профиля."""
    with pytest.raises(OutOfRangeError):
        density_profile(grid, "square")
