"""Unit-тесты траекторий, нормы E_T и пересчёта масштаба вязкости."""

import numpy as np
import pytest

from korteweg.core.fields import VectorField
from korteweg.core.grid import Grid
from korteweg.errors import OutOfRangeError
from korteweg.services.besov import BesovParams
from korteweg.services.trajectory import (
    Scaling,
    Trajectory,
    energy_norm,
    pushforward_inverse_rescale,
    rescale_to_unit_viscosity,
    trajectory_difference,
)


@pytest.fixture
def grid():
    return Grid(n_points=16)


@pytest.fixture
def decaying(grid):
    """u = e^{−2t}·TG на [0, 1], ∇P = 0."""
    base = VectorField.from_functions(
        grid, lambda x, y: np.sin(x) * np.cos(y), lambda x, y: -np.cos(x) * np.sin(y)
    )
    times = np.linspace(0.0, 1.0, 21)
    return Trajectory(
        times=tuple(times),
        u=tuple(base * float(np.exp(-2 * t)) for t in times),
        grad_p=tuple(VectorField.zeros(grid) for _ in times),
        scaling=Scaling.ORIGINAL,
    )


def test_sample_count_must_match_mesh(grid):
    """Число снимков не совпадает с числом узлов."""
    with pytest.raises(OutOfRangeError):
        Trajectory(times=(0.0, 0.1), u=(VectorField.zeros(grid),))


def test_time_derivative_backward(decaying):
    """Разностная производная близка к −2u."""
    dt_u = decaying.time_derivative()
    assert len(dt_u) == len(decaying)
    expected = -2.0 * decaying.u[10].values
    assert np.allclose(dt_u[10].values, expected, atol=0.1)


def test_difference_with_itself_is_zero(decaying):
    """‖u − u‖_{E_T} = 0."""
    diff = trajectory_difference(decaying, decaying)
    assert energy_norm(diff, BesovParams(s=0.0)).value == pytest.approx(0.0, abs=1e-14)


def test_difference_on_other_mesh(decaying):
    """Траектории на разных сетках по времени не вычитаются."""
    with pytest.raises(OutOfRangeError):
        trajectory_difference(decaying, decaying.truncated(5))


def test_energy_norm_parts(decaying):
    """Все четыре части неотрицательны, давление нулевое."""
    norm = energy_norm(decaying, BesovParams(s=0.0))
    assert set(norm.parts) == {"Linf_u", "L1_dtu", "L1_lap_u", "L1_gradP"}
    assert norm.parts["L1_gradP"] == 0.0
    assert norm.value > norm.parts["Linf_u"] > 0


def test_unit_viscosity_rescale(decaying):
    """t̃ = μ̄t, ũ = u/μ̄; обратный пересчёт возвращает исходные данные."""
    unit = rescale_to_unit_viscosity(decaying, 2.0)
    assert unit.final_time == pytest.approx(2.0)
    assert np.allclose(unit.u[3].values, decaying.u[3].values / 2.0)
    back = pushforward_inverse_rescale(unit, 2.0)
    assert back.scaling is Scaling.ORIGINAL
    assert np.allclose(back.times, decaying.times)
    assert np.allclose(back.u[3].values, decaying.u[3].values)


def test_rescale_twice_is_rejected(decaying):
    """Повторный переход в систему с единичной вязкостью."""
    unit = rescale_to_unit_viscosity(decaying, 2.0)
    with pytest.raises(OutOfRangeError):
        rescale_to_unit_viscosity(unit, 2.0)


def test_rescale_needs_positive_viscosity(decaying):
    """μ̄ ≤ 0 — ошибка."""
    with pytest.raises(OutOfRangeError):
        rescale_to_unit_viscosity(decaying, 0.0)
