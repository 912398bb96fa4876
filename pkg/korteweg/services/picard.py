"""Итерации Пикара по целым траекториям: внутреннее отображение Ψ при замороженном потоке,
внешнее Φ — пересчёт потока по новой скорости."""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field as PydanticField

from korteweg.core.fields import ScalarField, VectorField
from korteweg.core.operators import differentiate, l2_norm, matmul, matvec, multiply
from korteweg.core.timemesh import time_aggregate
from korteweg.errors import NoContractionError, OutOfRangeError, SmallnessExceededError
from korteweg.services.besov import BesovParams, besov_norm
from korteweg.services.coefficients import Coefficients
from korteweg.services.forcings import assemble_forcings, h4_term, transformed_sym_gradient
from korteweg.services.lagrangian import (
    FlowMap,
    JacobianData,
    build_flow,
    divergence_constraint_term,
    jacobian_data,
    smallness_check,
)
from korteweg.services.stokes import StokesState, advance, check_solenoidal, free_solution
from korteweg.services.trajectory import Trajectory, energy_norm, trajectory_difference

logger = logging.getLogger(__name__)

Route = Literal["general", "small_density"]


class PicardConfig(BaseModel):
    """Параметры итераций.

    Остановка — по абсолютному расстоянию ‖v̄^{k+1} − v̄^k‖_{E_T} < tol между
    соседними итерациями.
    """

    model_config = ConfigDict(frozen=True)

    tol: float = PydanticField(1e-8, gt=0)
    max_iters: int = PydanticField(30, ge=1)
    inner_iterations: int = PydanticField(1, ge=1)
    use_free_solution: bool = True
    epsilon0: float = PydanticField(0.1, gt=0)
    smallness_c: float = PydanticField(0.5, gt=0)
    contraction_patience: int = PydanticField(3, ge=1)
    besov_p: float = PydanticField(2.0, ge=1)
    stepper: Literal["imex1", "cnab2"] = "imex1"


@dataclass(frozen=True)
class PicardResult:
    trajectory: Trajectory
    flow: FlowMap
    free: Trajectory
    iterations: int
    contraction_log: tuple[float, ...]
    distances: tuple[float, ...]
    converged: bool


def energy_params(dim: int, p: float) -> BesovParams:
    """Ḃ^{n/p−1}_{p,1} — пространство нормы E_T."""
    return BesovParams(s=dim / p - 1.0, p=p, r=1.0)


def _schemes(route: Route, use_free_solution: bool) -> tuple[str, str]:
    """(схема правой части, режим оператора)."""
    if route == "general":
        return ("aux3_G" if use_free_solution else "aux2_F"), "variable"
    if route == "small_density":
        return ("aux6_outer" if use_free_solution else "aux4_H"), "constant"
    raise OutOfRangeError(f"unknown route: {route}")


def _linear_solve(
    coeffs: Coefficients,
    frozen: Trajectory,
    jacs: list[JacobianData],
    base: Optional[Trajectory],
    start: VectorField,
    scheme: str,
    mode: str,
    stepper: str,
) -> Trajectory:
    """Одно применение Ψ: линейная задача с правой частью от замороженной итерации (w̄, ∇Q̄)."""
    dt = frozen.dt
    w_full = frozen.u
    q_full = frozen.pressure()
    if base is not None:
        tilde_u = [w - b for w, b in zip(w_full, base.u)]
        tilde_p = [q - b for q, b in zip(q_full, base.pressure())]
    else:
        tilde_u, tilde_p = list(w_full), list(q_full)

    state = StokesState.initial(start)
    us, ps = [start], []
    for n in range(len(frozen) - 1):
        jac = jacs[n + 1]
        w_dt = (w_full[n + 1] - w_full[n]) * (1.0 / dt)
        forcing = assemble_forcings(scheme, coeffs, jac, w=w_full[n + 1], grad_q=q_full[n + 1], w_dt=w_dt)
        div_m = divergence_constraint_term(w_full[n + 1], jac).div_m
        if mode == "variable":
            extra = {"explicit_velocity": tilde_u[n + 1], "pressure_lag": tilde_p[n + 1]}
        else:
            extra = {"symmetric_gradient": True, "stepper": stepper}
        state = advance(state, coeffs, dt, forcing=forcing, div_m=div_m, mode=mode, **extra)
        us.append(state.u)
        ps.append(state.grad_p)
    grad_p = [ps[0]] + ps if ps else [VectorField.zeros(start.grid)]
    solved = Trajectory(times=frozen.times, u=tuple(us), grad_p=tuple(grad_p))
    if base is None:
        return solved
    return Trajectory(
        times=frozen.times,
        u=tuple(u + b for u, b in zip(solved.u, base.u)),
        grad_p=tuple(p + b for p, b in zip(solved.pressure(), base.pressure())),
    )


def picard_solve(
    coeffs: Coefficients,
    u0: VectorField,
    horizon: float,
    n_steps: int,
    config: Optional[PicardConfig] = None,
    route: Route = "general",
) -> PicardResult:
    """Неподвижная точка лагранжевой системы на [0, horizon] (время исходной системы).

    Траектория возвращается в системе с единичной вязкостью на сетке t̃ = μ̄t.
    Начальная итерация — свободное решение (u_L, ∇P_L).
    """
    config = config or PicardConfig()
    grid = coeffs.grid
    check_solenoidal(u0)
    scheme, mode = _schemes(route, config.use_free_solution)

    if route == "small_density":
        one = ScalarField.constant(grid, 1.0)
        deviation = besov_norm(coeffs.rho0 - one, BesovParams(s=grid.dim / config.besov_p, p=config.besov_p))
        if deviation > config.smallness_c:
            raise SmallnessExceededError(
                f"‖ρ₀ − 1‖ = {deviation:.4g} exceeds the small-density threshold {config.smallness_c}"
            )

    free = free_solution(coeffs, u0, horizon, n_steps, mode=mode, exact=False, stepper=config.stepper)
    if config.use_free_solution:
        base: Optional[Trajectory] = free
        start = VectorField.zeros(grid)
    else:
        base = None
        start = free.u[0]

    params = energy_params(grid.dim, config.besov_p)
    current = free
    distances: list[float] = []
    ratios: list[float] = []
    streak = 0
    converged = False
    iteration = 0
    logger.info(
        "Picard start: route=%s scheme=%s n=%d steps=%d horizon=%.4g",
        route,
        scheme,
        grid.n_points,
        n_steps,
        horizon,
    )
    for iteration in range(1, config.max_iters + 1):
        report = smallness_check(current, config.epsilon0)
        if not report.ok:
            raise SmallnessExceededError(
                f"ε₀ exceeded: ∫‖Dv̄‖ = {report.integral:.4g} > {config.epsilon0} at t̃={report.exceeded_at:.4g}"
            )
        flow = build_flow(current)
        jacs = [jacobian_data(flow, t) for t in current.times]

        iterate = current
        for _ in range(config.inner_iterations):
            iterate = _linear_solve(coeffs, iterate, jacs, base, start, scheme, mode, config.stepper)

        delta = energy_norm(trajectory_difference(iterate, current), params).value
        if distances:
            ratio = delta / distances[-1] if distances[-1] > 0 else 0.0
            ratios.append(ratio)
            logger.debug("Picard iteration %d: distance %.3e, contraction ratio %.4f", iteration, delta, ratio)
            streak = streak + 1 if ratio >= 1.0 else 0
            if streak >= config.contraction_patience:
                raise NoContractionError(
                    f"no contraction at this T: ratio >= 1 for {streak} consecutive iterations"
                )
        else:
            logger.debug("Picard iteration %d: distance %.3e", iteration, delta)
        distances.append(delta)
        current = iterate
        if delta < config.tol:
            converged = True
            break

    if converged:
        logger.info("Picard converged in %d iterations (last distance %.3e)", iteration, distances[-1])
    else:
        logger.warning("Picard stopped after %d iterations without reaching tol=%.1e", iteration, config.tol)
    return PicardResult(
        trajectory=current,
        flow=build_flow(current),
        free=free,
        iterations=iteration,
        contraction_log=tuple(ratios),
        distances=tuple(distances),
        converged=converged,
    )


@dataclass(frozen=True)
class MomentumResidual:
    per_step: tuple[float, ...]
    l1: float
    relative: float


def s1_residual(traj: Trajectory, coeffs: Coefficients) -> MomentumResidual:
    """Невязка ρ₀∂_t u − div(μ(ρ₀)A·D_A(u)) + ᵗA∇P + κ div[k A g⊗g] (обратный Эйлер по времени)."""
    flow = build_flow(traj)
    dt = traj.dt
    pressure = traj.pressure()
    norms = [0.0]
    scales = [0.0]
    for n in range(1, len(traj)):
        jac = jacobian_data(flow, traj.times[n])
        u = traj.u[n]
        inertia = multiply(coeffs.rho0, (u - traj.u[n - 1]) * (1.0 / dt))
        stress = multiply(coeffs.mu_rho0, matmul(jac.a, transformed_sym_gradient(u, jac.a)))
        pressure_term = matvec(jac.a, pressure[n], transpose=True)
        r = inertia - differentiate(stress, "divergence") + pressure_term - h4_term(coeffs, jac)
        norms.append(l2_norm(r))
        scales.append(l2_norm(inertia) + l2_norm(pressure_term))
    l1 = time_aggregate(norms, traj.times, 1)
    scale = time_aggregate(scales, traj.times, 1)
    return MomentumResidual(per_step=tuple(norms), l1=l1, relative=l1 / scale if scale > 0 else l1)
