"""Сборка прогонов: время выхода u_L из ε-шара, перенос лагранжева решения в эйлеровы
координаты, диагностика по шагам."""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from korteweg.core.fields import Field, ScalarField, VectorField, check_same_grid
from korteweg.core.operators import differentiate, l2_norm, matvec
from korteweg.core.timemesh import running_integral
from korteweg.errors import OutOfRangeError
from korteweg.services.besov import BesovParams, besov_norm, hessian_besov_norm
from korteweg.services.coefficients import Coefficients
from korteweg.services.eulerian import eulerian_reference_solve
from korteweg.services.lagrangian import FlowMap, fourier_interpolate, invert_flow, jacobian_data
from korteweg.services.picard import PicardConfig, PicardResult, picard_solve
from korteweg.services.trajectory import (
    Frame,
    Scaling,
    Trajectory,
    pushforward_inverse_rescale,
    rescale_to_unit_viscosity,
)

logger = logging.getLogger(__name__)

Solver = Literal["lagrangian", "eulerian"]


def exit_aggregate(traj: Trajectory, p: float = 2.0) -> np.ndarray:
    """Накопленное ‖(∂_t u, ∇²u, ∇P)‖_{L¹_t Ḃ^{n/p−1}} + ‖u‖_{L²_t Ḃ^{n/p}} в узлах сетки."""
    dim = traj.grid.dim
    lower = BesovParams(s=dim / p - 1.0, p=p)
    upper = BesovParams(s=dim / p, p=p)
    first_order = [
        besov_norm(du, lower) + hessian_besov_norm(u, lower) + besov_norm(gp, lower)
        for du, u, gp in zip(traj.time_derivative(), traj.u, traj.pressure())
    ]
    second_order = [besov_norm(u, upper) ** 2 for u in traj.u]
    return running_integral(first_order, traj.times) + np.sqrt(running_integral(second_order, traj.times))


def exit_time(traj: Trajectory, epsilon: float, p: float = 2.0) -> float:
    """Первый узел, где накопленная величина превышает ε/2; иначе конец сетки."""
    if epsilon <= 0:
        raise OutOfRangeError(f"epsilon must be positive, got {epsilon}")
    running = exit_aggregate(traj, p)
    over = np.nonzero(running > epsilon / 2.0)[0]
    if over.size:
        return float(traj.times[int(over[0])])
    return float(traj.times[-1])


@dataclass(frozen=True)
class PushforwardResult:
    u: Trajectory
    rho: Trajectory


def _sample(field: Field, points: Optional[np.ndarray]) -> Field:
    if points is None:
        return field
    return type(field)(field.grid, fourier_interpolate(field, points))


def pushforward_solution(
    lagr: Trajectory, flow: FlowMap, rho0: ScalarField, mu_bar: float
) -> PushforwardResult:
    """(u, ∇P, ρ) = (ū, ᵗA∇P̄, ρ₀)∘X⁻¹, затем обратный пересчёт масштаба вязкости."""
    check_same_grid(rho0, lagr.u[0], flow.displacement[0])
    if lagr.frame is not Frame.LAGRANGIAN:
        raise OutOfRangeError("pushforward expects a Lagrangian trajectory")
    pressure = lagr.pressure()
    us, ps, rhos = [], [], []
    for k, t in enumerate(lagr.times):
        d = flow.at(t)
        points = invert_flow(d) if np.any(d.values) else None
        grad_p = matvec(jacobian_data(flow, t).a, pressure[k], transpose=True)
        us.append(_sample(lagr.u[k], points))
        ps.append(_sample(grad_p, points))
        rhos.append(_sample(rho0, points))
    u_traj = Trajectory(
        times=lagr.times, u=tuple(us), grad_p=tuple(ps), frame=Frame.EULERIAN, scaling=lagr.scaling
    )
    rho_traj = Trajectory(
        times=lagr.times, u=tuple(rhos), frame=Frame.EULERIAN, scaling=lagr.scaling, quantity="density"
    )
    if lagr.scaling is Scaling.UNIT_VISCOSITY:
        u_traj = pushforward_inverse_rescale(u_traj, mu_bar)
        rho_traj = pushforward_inverse_rescale(rho_traj, mu_bar)
    return PushforwardResult(u=u_traj, rho=rho_traj)


def lagrangian_diagnostics(traj: Trajectory, flow: FlowMap) -> list[dict[str, float]]:
    """‖div(adj(DX)ū)‖₂ и ‖J − 1‖_∞ в каждом узле."""
    rows = []
    for k, t in enumerate(traj.times):
        jac = jacobian_data(flow, t)
        transformed = differentiate(matvec(jac.adj, traj.u[k]), "divergence")
        rows.append(
            {
                "t": float(t),
                "div_residual": l2_norm(transformed),
                "J_dev": float(np.max(np.abs(jac.det.values - 1.0))),
            }
        )
    return rows


def running_energy_parts(traj: Trajectory, params: BesovParams) -> dict[str, np.ndarray]:
    """Части нормы E_t для всех префиксов [0, t_k] сразу."""
    times = traj.times
    return {
        "E_Linf_u": np.maximum.accumulate([besov_norm(u, params) for u in traj.u]),
        "E_L1_dtu": running_integral([besov_norm(d, params) for d in traj.time_derivative()], times),
        "E_L1_lap_u": running_integral([hessian_besov_norm(u, params) for u in traj.u], times),
        "E_L1_gradP": running_integral([besov_norm(p, params) for p in traj.pressure()], times),
    }


def kinetic_energy(u: VectorField) -> float:
    return 0.5 * l2_norm(u) ** 2


@dataclass(frozen=True)
class SimulationResult:
    eulerian: PushforwardResult
    diagnostics: list[dict[str, float]]
    picard: Optional[PicardResult] = None


def run_simulation(
    coeffs: Coefficients,
    u0: VectorField,
    horizon: float,
    n_steps: int,
    config: Optional[PicardConfig] = None,
    route: str = "general",
    solver: Solver = "lagrangian",
) -> SimulationResult:
    """Один прогон: диагностика по шагам во времени исходной системы."""
    config = config or PicardConfig()
    params = BesovParams(s=coeffs.grid.dim / config.besov_p - 1.0, p=config.besov_p)

    if solver == "lagrangian":
        result = picard_solve(coeffs, u0, horizon, n_steps, config, route)
        lagr = result.trajectory
        eulerian = pushforward_solution(lagr, result.flow, coeffs.rho0, coeffs.mu_bar)
        structural = lagrangian_diagnostics(lagr, result.flow)
        unit = lagr
    elif solver == "eulerian":
        result = None
        run = eulerian_reference_solve(coeffs, u0, horizon, n_steps, stepper=config.stepper)
        eulerian = PushforwardResult(u=run.u, rho=run.rho)
        unit = rescale_to_unit_viscosity(run.u, coeffs.mu_bar)
        structural = [
            {"t": t, "div_residual": l2_norm(differentiate(u, "divergence"))} for t, u in zip(unit.times, unit.u)
        ]
    else:
        raise OutOfRangeError(f"unknown solver: {solver}")

    parts = running_energy_parts(unit, params)
    rows = []
    for k, t in enumerate(eulerian.u.times):
        row = {"t": float(t), "kinetic_energy": kinetic_energy(eulerian.u.u[k])}
        row.update({name: float(values[k]) for name, values in parts.items()})
        row.update({key: value for key, value in structural[k].items() if key != "t"})
        rows.append(row)
    logger.info("Simulation finished: solver=%s, %d stored times", solver, len(rows))
    return SimulationResult(eulerian=eulerian, diagnostics=rows, picard=result)
