"""Unit-тесты шага Стокса, свободного решения и подгонки огибающей."""

import math
from dataclasses import replace

import numpy as np
import pytest

from korteweg.core.fields import ScalarField, VectorField
from korteweg.core.grid import Grid
from korteweg.core.operators import differentiate, inverse_laplacian, leray_project
from korteweg.errors import NoContractionError, NonSolenoidalError, OutOfRangeError, StepRejectedError
from korteweg.services import stokes
from korteweg.services.coefficients import Coefficients, PolynomialLaw, density_profile, velocity_profile
from korteweg.services.forcings import capillary_source
from korteweg.services.stokes import (
    StokesState,
    advance,
    check_solenoidal,
    envelope_model,
    fit_dyadic_envelope,
    fit_envelope_table,
    free_solution,
    implicit_step,
    stokes_step,
    unit_time_mesh,
)


@pytest.fixture
def grid():
    return Grid(n_points=16)


@pytest.fixture
def unit(grid):
    """ρ₀ ≡ 1, μ ≡ 1, κ̄ = 0."""
    return Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 1.0))


@pytest.fixture
def tg(grid):
    return velocity_profile(grid, "taylor_green", amplitude=1.0)


def test_heat_step_per_mode(unit, tg):
    """Неявный Эйлер: мода |k|² = 2 умножается на 1/(1 + 2dt), давление нулевое."""
    state = stokes_step(StokesState.initial(tg), unit, 0.01)
    assert np.allclose(state.u.values, tg.values / 1.02, atol=1e-13)
    assert state.grad_p.max_abs() < 1e-12
    assert state.time == pytest.approx(0.01)


def test_crank_nicolson_step(unit, tg):
    """CN: множитель (1 − dt)/(1 + dt) для |k|² = 2."""
    state = stokes_step(StokesState.initial(tg), unit, 0.01, stepper="cnab2")
    assert np.allclose(state.u.values, tg.values * (0.99 / 1.01), atol=1e-13)


def test_variable_mode_matches_constant_for_unit_coefficients(unit, tg):
    """При ρ₀ = μ = 1 переменный оператор совпадает с постоянным."""
    constant = stokes_step(StokesState.initial(tg), unit, 0.05)
    variable = stokes_step(StokesState.initial(tg), unit, 0.05, mode="variable")
    assert np.allclose(variable.u.values, constant.u.values, atol=1e-12)


def test_step_imposes_divergence(grid, unit):
    """div u^{n+1} = div M (без средней)."""
    div_m = ScalarField.from_function(grid, lambda x, y: np.cos(x) + 0.5 * np.sin(2 * y))
    state = stokes_step(StokesState.initial(VectorField.zeros(grid)), unit, 0.01, div_m=div_m)
    assert np.allclose(differentiate(state.u, "divergence").values, div_m.values, atol=1e-12)


def test_gradient_forcing_goes_to_pressure(grid, unit):
    """Градиентная сила целиком уходит в ∇P, скорость не меняется."""
    force = differentiate(ScalarField.from_function(grid, lambda x, y: np.sin(x) * np.sin(y)), "gradient")
    state = stokes_step(StokesState.initial(VectorField.zeros(grid)), unit, 0.01, forcing=force)
    assert state.u.max_abs() < 1e-13
    assert np.allclose(state.grad_p.values, force.values, atol=1e-12)


def test_non_positive_step(unit, tg):
    """dt ≤ 0 — ошибка."""
    with pytest.raises(OutOfRangeError):
        stokes_step(StokesState.initial(tg), unit, 0.0)


def test_growth_check_rejects_step(unit, tg):
    """Шаг отвергается, если ‖u‖ превышает допустимую долю бюджета."""
    with pytest.raises(StepRejectedError):
        stokes_step(StokesState.initial(tg), unit, 0.01, growth_limit=0.5)


def test_advance_gives_up_after_halvings(unit, tg):
    """Повторные половинные шаги не спасают — ошибка пробрасывается."""
    with pytest.raises(StepRejectedError):
        advance(StokesState.initial(tg), unit, 0.01, max_halvings=2, growth_limit=0.5)


def test_advance_accepts_regular_step(unit, tg):
    """Обычный шаг проходит без деления."""
    direct = stokes_step(StokesState.initial(tg), unit, 0.01)
    advanced = advance(StokesState.initial(tg), unit, 0.01)
    assert np.array_equal(direct.u.values, advanced.u.values)


def test_halved_step_restarts_ab2_history(unit, tg, monkeypatch):
    """После деления шага история AB2 сбрасывается: следующий шаг dt начинается как IMEX1."""
    original = stokes.stokes_step
    calls = []

    def rejecting_once(state, coeffs, dt, **kwargs):
        calls.append(dt)
        if len(calls) == 1:
            raise StepRejectedError("forced rejection")
        return original(state, coeffs, dt, **kwargs)

    monkeypatch.setattr(stokes, "stokes_step", rejecting_once)
    start = replace(StokesState.initial(tg), explicit_prev=tg)
    state = advance(start, unit, 0.02, stepper="cnab2", mode="variable")
    assert calls == [0.02, 0.01, 0.01]
    assert state.explicit_prev is None
    assert state.time == pytest.approx(0.02)


def _cnab2_error(coeffs, u0, n_steps, horizon=0.5):
    state = StokesState.initial(u0)
    dt = horizon / n_steps
    for _ in range(n_steps):
        state = stokes_step(state, coeffs, dt, mode="variable", stepper="cnab2")
    exact = u0 * math.exp(-2.0 * 0.9 * horizon)
    return float(np.max(np.abs(state.u.values - exact.values)))


def test_cnab2_is_second_order(grid, tg):
    """ρ₀ ≡ 1.25, μ = 1.125: явная часть (ab − 1)Δu, решение e^{−1.8t}u₀; ошибка падает как dt²."""
    coeffs = Coefficients(
        mu_bar=1.0,
        kappa_bar=0.0,
        rho0=ScalarField.constant(grid, 1.25),
        mu_fn=PolynomialLaw((0.5,)),
    )
    errors = [_cnab2_error(coeffs, tg, n) for n in (10, 20, 40)]
    assert errors[0] < 1e-3
    for coarse, fine in zip(errors, errors[1:]):
        assert math.log2(coarse / fine) > 1.8


def test_implicit_step_without_variable_part(unit, tg):
    """ρ₀ = μ = 1: неявный шаг совпадает с одним шагом IMEX."""
    explicit = stokes_step(StokesState.initial(tg), unit, 0.01)
    implicit = implicit_step(StokesState.initial(tg), unit, 0.01)
    assert np.allclose(implicit.u.values, explicit.u.values, atol=1e-12)


def test_implicit_step_iteration_budget(grid, tg):
    """Одна итерация не достигает неподвижной точки при переменной плотности."""
    coeffs = Coefficients(mu_bar=1.0, kappa_bar=0.0, rho0=density_profile(grid, "cosine", amplitude=0.3))
    with pytest.raises(NoContractionError):
        implicit_step(StokesState.initial(tg), coeffs, 0.01, max_iters=1)


def test_check_solenoidal_rejects_gradient(grid):
    """Градиентное поле не бездивергентно."""
    grad = differentiate(ScalarField.from_function(grid, lambda x, y: np.cos(x)), "gradient")
    with pytest.raises(NonSolenoidalError):
        check_solenoidal(grad)


def test_unit_time_mesh(grid):
    """Сетка t̃ = μ̄t."""
    coeffs = Coefficients(mu_bar=2.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 1.0))
    mesh = unit_time_mesh(coeffs, 0.5, 4)
    assert mesh[-1] == pytest.approx(1.0)
    assert len(mesh) == 5


def test_free_solution_heat_decay(grid, tg):
    """κ̄ = 0: u_L(t̃) = e^{t̃Δ}u₀/μ̄ на сетке t̃ = μ̄t."""
    coeffs = Coefficients(mu_bar=2.0, kappa_bar=0.0, rho0=ScalarField.constant(grid, 1.0))
    traj = free_solution(coeffs, tg, 0.5, 10)
    assert traj.final_time == pytest.approx(1.0)
    assert np.allclose(traj.u[-1].values, tg.values * (math.exp(-2.0) / 2.0), atol=1e-12)


def test_free_solution_pressure_and_steady_state(grid):
    """∇P_L = −κℚF; при больших t̃ u_L выходит на κΔ⁻¹ℙF, шаги и точная формула сходятся."""
    coeffs = Coefficients(mu_bar=1.0, kappa_bar=0.2, rho0=density_profile(grid, "bump", amplitude=0.3))
    zero = VectorField.zeros(grid)
    exact = free_solution(coeffs, zero, 40.0, 100)
    stepped = free_solution(coeffs, zero, 40.0, 100, exact=False)
    pf, qf = leray_project(capillary_source(coeffs))
    steady = inverse_laplacian(pf) * 0.2
    assert np.allclose(exact.u[-1].values, steady.values, atol=1e-10)
    assert np.allclose(stepped.u[-1].values, steady.values, atol=1e-10)
    assert np.allclose(stepped.grad_p[3].values, (qf * -0.2).values, atol=1e-10)


def test_free_solution_variable_mode_reduces_to_heat(unit, tg):
    """Переменный оператор при ρ₀ = μ = 1 — неявный Эйлер для теплового уравнения."""
    traj = free_solution(unit, tg, 0.1, 5, mode="variable")
    assert np.allclose(traj.u[-1].values, tg.values / 1.04**5, atol=1e-11)


def test_envelope_fit_recovers_rate():
    """Синтетическая таблица по модели: C = 1, c = 0.1."""
    times = np.linspace(0.0, 2.0, 11)
    js = np.array([0, 1, 2])
    initial = np.array([1.0, 0.5, 0.2])
    force = np.array([0.1, 0.0, 0.3])
    observed = envelope_model(times, js, initial, force, 0.1)
    fit = fit_envelope_table(times, js, observed, initial, force, c_candidates=np.array([0.05, 0.1, 0.2]))
    assert fit.c == 0.1
    assert fit.C == pytest.approx(1.0)
    assert fit.worst_residual < 1e-12


def test_envelope_fit_shape_mismatch():
    """Таблица не той формы."""
    with pytest.raises(OutOfRangeError):
        fit_envelope_table([0.0, 1.0], [0], np.ones((3, 1)), [1.0], [0.0])


def test_dyadic_envelope_of_heat_flow(unit, tg):
    """Тепловая траектория одной моды: скорость затухания близка к |k|² = 2."""
    traj = free_solution(unit, tg, 1.0, 20)
    fit = fit_dyadic_envelope(traj)
    assert fit.c == pytest.approx(2.0, rel=0.02)
    assert fit.worst_residual < 0.01
