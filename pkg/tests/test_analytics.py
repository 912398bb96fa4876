"""Unit-тесты степенных подгонок и оценки времени жизни."""

import math

import numpy as np
import pytest

from korteweg.errors import OutOfRangeError
from korteweg.services.analytics import (
    LifespanConstants,
    capillary_constant,
    fit_power_law,
    lifespan_branches,
    lifespan_predictor,
)


def test_fit_identity():
    """y = x: наклон 1, r² = 1."""
    fit = fit_power_law([(x, x) for x in (0.1, 0.3, 1.0, 3.0)])
    assert fit.slope == pytest.approx(1.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_inverse():
    """y = 5/x: наклон −1, свободный член log 5."""
    fit = fit_power_law([(x, 5.0 / x) for x in (0.01, 0.1, 1.0)])
    assert fit.slope == pytest.approx(-1.0)
    assert fit.intercept == pytest.approx(math.log(5.0))


def test_fit_noisy_square():
    """y ≈ x² с шумом в 2%."""
    rng = np.random.default_rng(0)
    xs = np.logspace(-2, 0, 8)
    points = [(float(x), float(x**2 * (1 + 0.02 * rng.standard_normal()))) for x in xs]
    fit = fit_power_law(points)
    assert fit.slope == pytest.approx(2.0, abs=0.05)
    assert fit.r_squared > 0.99


def test_fit_needs_three_points():
    """Двух точек мало."""
    with pytest.raises(OutOfRangeError):
        fit_power_law([(1.0, 1.0), (2.0, 2.0)])


def test_fit_rejects_nonpositive():
    """Логарифм от нуля не берётся."""
    with pytest.raises(OutOfRangeError):
        fit_power_law([(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)])


def test_capillary_constant():
    """C_ρ₀ = (1 + 0.5)·2·(2 + 0.5) = 7.5."""
    assert capillary_constant((0.5, 2.0), LifespanConstants()) == pytest.approx(7.5)


def test_doubling_kappa_halves_first_branch():
    """u₀ = 0: первая ветвь ∝ 1/κ̄, вторая ∝ 1/κ̄²."""
    first, second = lifespan_branches((0.0, 0.0), (0.2, 0.5), 1.0, 0.1, 0.05)
    first2, second2 = lifespan_branches((0.0, 0.0), (0.2, 0.5), 1.0, 0.2, 0.05)
    assert first2 == pytest.approx(first / 2)
    assert second2 == pytest.approx(second / 4)


def test_rest_without_capillarity_lives_forever():
    """u₀ = 0, κ̄ = 0: T₀ = ∞."""
    assert lifespan_predictor((0.0, 0.0), (0.2, 0.5), 1.0, 0.0, 0.05) == math.inf


def test_predictor_is_smaller_branch():
    """T₀ — минимум двух ветвей."""
    branches = lifespan_branches((0.3, 0.6), (0.2, 0.5), 2.0, 0.1, 0.05)
    assert lifespan_predictor((0.3, 0.6), (0.2, 0.5), 2.0, 0.1, 0.05) == min(branches)


def test_invalid_arguments():
    """μ̄ ≤ 0 или κ̄ < 0."""
    with pytest.raises(OutOfRangeError):
        lifespan_branches((0.1, 0.1), (0.1, 0.1), 0.0, 0.1, 0.05)
    with pytest.raises(OutOfRangeError):
        lifespan_branches((0.1, 0.1), (0.1, 0.1), 1.0, -0.1, 0.05)
