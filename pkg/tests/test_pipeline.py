"""Unit-тесты сборки прогонов: время выхода, перенос в эйлеровы координаты, диагностика."""

import numpy as np
import pytest

from korteweg.core.fields import ScalarField, VectorField
from korteweg.core.grid import Grid
from korteweg.errors import OutOfRangeError
from korteweg.services.coefficients import Coefficients, density_profile, velocity_profile
from korteweg.services.lagrangian import FlowMap
from korteweg.services.picard import PicardConfig
from korteweg.services.pipeline import (
    exit_time,
    kinetic_energy,
    lagrangian_diagnostics,
    pushforward_solution,
    run_simulation,
)
from korteweg.services.stokes import free_solution
from korteweg.services.trajectory import Frame, Scaling, Trajectory


@pytest.fixture
def grid():
    return Grid(n_points=16)


@pytest.fixture
def homogeneous(grid):
    return Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 1.0))


@pytest.fixture
def resting_flow(grid):
    """Тождественный поток на сетке из трёх узлов."""
    times = (0.0, 0.1, 0.2)
    return FlowMap(grid=grid, times=times, displacement=tuple(VectorField.zeros(grid) for _ in times))


def test_exit_time_of_rest_is_horizon(grid, homogeneous):
    """u₀ = 0, κ̄ = 0: u_L ≡ 0 не покидает шар, время выхода — конец сетки."""
    traj = free_solution(homogeneous, VectorField.zeros(grid), 1.0, 10)
    assert exit_time(traj, 0.05) == pytest.approx(1.0)


def test_exit_time_grows_with_epsilon(grid):
    """Чем шире шар, тем позже выход."""
    coeffs = Coefficients(mu_bar=1.0, kappa_bar=0.5, rho0=density_profile(grid, "cosine", amplitude=0.2))
    traj = free_solution(coeffs, velocity_profile(grid, "taylor_green", amplitude=0.1), 2.0, 40)
    times = [exit_time(traj, eps) for eps in (0.01, 0.05, 0.2)]
    assert times == sorted(times)
    assert times[0] < traj.final_time


def test_exit_time_needs_positive_epsilon(grid, homogeneous):
    """ε ≤ 0 — ошибка."""
    traj = free_solution(homogeneous, VectorField.zeros(grid), 1.0, 4)
    with pytest.raises(OutOfRangeError):
        exit_time(traj, 0.0)


def test_pushforward_of_identity_flow(grid, resting_flow):
    """Тождественный поток и μ̄ = 1: перенос ничего не меняет."""
    u = velocity_profile(grid, "taylor_green", amplitude=0.2)
    rho0 = density_profile(grid, "cosine", amplitude=0.1)
    lagr = Trajectory(times=resting_flow.times, u=(u, u, u))
    result = pushforward_solution(lagr, resting_flow, rho0, 1.0)
    assert result.u.frame is Frame.EULERIAN
    assert result.u.scaling is Scaling.ORIGINAL
    assert np.allclose(result.u.u[2].values, u.values)
    assert np.allclose(result.rho.u[1].values, rho0.values)


def test_pushforward_rejects_eulerian_input(grid, resting_flow):
    """На вход нужна лагранжева траектория."""
    lagr = Trajectory(times=resting_flow.times, u=(VectorField.zeros(grid),) * 3, frame=Frame.EULERIAN)
    with pytest.raises(OutOfRangeError):
        pushforward_solution(lagr, resting_flow, ScalarField.constant(grid, 1.0), 1.0)


def test_diagnostics_of_identity_flow(grid, resting_flow):
    """div(adj(DX)ū) = div ū = 0 и J = 1."""
    u = velocity_profile(grid, "taylor_green", amplitude=0.2)
    rows = lagrangian_diagnostics(Trajectory(times=resting_flow.times, u=(u, u, u)), resting_flow)
    assert [row["t"] for row in rows] == [0.0, 0.1, 0.2]
    assert all(row["div_residual"] < 1e-12 for row in rows)
    assert all(row["J_dev"] == 0.0 for row in rows)


def test_kinetic_energy_of_taylor_green(grid):
    """½‖u‖² для TG амплитуды a: a²π²."""
    u = velocity_profile(grid, "taylor_green", amplitude=0.5)
    assert kinetic_energy(u) == pytest.approx(0.25 * np.pi**2)


def test_lagrangian_simulation_rows(grid, homogeneous):
    """Лагранжев прогон: строка на каждый узел, есть J_dev."""
    u0 = velocity_profile(grid, "taylor_green", amplitude=0.05)
    result = run_simulation(homogeneous, u0, 0.02, 4, PicardConfig())
    assert len(result.diagnostics) == 5
    assert result.picard is not None and result.picard.converged
    assert "J_dev" in result.diagnostics[-1]
    energies = [row["kinetic_energy"] for row in result.diagnostics]
    assert energies == sorted(energies, reverse=True)


def test_eulerian_simulation_rows(grid, homogeneous):
    """Эйлеров прогон: без J_dev, без результата Пикара."""
    u0 = velocity_profile(grid, "taylor_green", amplitude=0.05)
    result = run_simulation(homogeneous, u0, 0.02, 4, solver="eulerian")
    assert len(result.diagnostics) == 5
    assert result.picard is None
    assert "J_dev" not in result.diagnostics[0]
    assert result.diagnostics[-1]["t"] == pytest.approx(0.02)


def test_unknown_solver(grid, homogeneous):
    """Неизвестный решатель."""
    with pytest.raises(OutOfRangeError):
        run_simulation(homogeneous, VectorField.zeros(grid), 0.02, 2, solver="spectral")
