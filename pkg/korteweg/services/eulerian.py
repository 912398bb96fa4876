"""Эйлеров эталонный решатель: перенос ρ (RK2) и импульс шагом IMEX с явной нелинейностью."""

import logging
from dataclasses import dataclass

import numpy as np

from korteweg.core.fields import ScalarField, VectorField, check_same_grid
from korteweg.core.operators import dealias, differentiate, dot, matvec, multiply
from korteweg.errors import DensityBoundError
from korteweg.services.coefficients import Coefficients
from korteweg.services.forcings import eulerian_capillary_force
from korteweg.services.stokes import StokesState, advance, check_solenoidal, unit_time_mesh
from korteweg.services.trajectory import Frame, Scaling, Trajectory, pushforward_inverse_rescale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EulerianRun:
    rho: Trajectory
    u: Trajectory
    mass: tuple[float, ...]
    rho_min: tuple[float, ...]
    rho_max: tuple[float, ...]


def _advection_rate(u: VectorField, rho: ScalarField) -> ScalarField:
    """−u·∇ρ."""
    return -dot(u, differentiate(rho, "gradient"))


def transport_step(rho: ScalarField, u: VectorField, dt: float) -> ScalarField:
    """Хойн (RK2) для ∂_t ρ = −u·∇ρ при замороженной скорости."""
    k1 = _advection_rate(u, rho)
    predictor = rho + k1 * dt
    k2 = _advection_rate(u, predictor)
    return rho + (k1 + k2) * (0.5 * dt)


def convective_term(u: VectorField) -> VectorField:
    """(u·∇)u = Du·u."""
    return matvec(differentiate(u, "jacobian"), u)


def _mass(rho: ScalarField) -> float:
    return float(rho.grid.cell_volume * np.sum(rho.values))


def eulerian_reference_solve(
    coeffs: Coefficients,
    u0: VectorField,
    horizon: float,
    n_steps: int,
    stepper: str = "imex1",
) -> EulerianRun:
    """Навье-Стокс-Кортевег на [0, horizon]: счёт при единичной вязкости, вывод в исходной системе.

    На шаге: ρ^{n+1} переносом с uⁿ, затем uⁿ⁺¹ оператором с a = 1/ρ^{n+1}, b = μ(ρ^{n+1})
    и явной правой частью −uⁿ·∇uⁿ − κ(1/ρ)div(k(ρ)∇ρ⊗∇ρ).
    """
    check_same_grid(u0, coeffs.rho0)
    check_solenoidal(u0)
    times = unit_time_mesh(coeffs, horizon, n_steps)
    dt = float(times[1] - times[0])

    lower = coeffs.rho_floor / 2.0
    upper = 2.0 * float(np.max(coeffs.rho0.values))
    rho = dealias(coeffs.rho0)
    state = StokesState.initial(u0 * (1.0 / coeffs.mu_bar))
    rhos, us, ps = [rho], [state.u], []
    mass = [_mass(rho)]
    rho_min = [float(np.min(rho.values))]
    rho_max = [float(np.max(rho.values))]

    for n in range(n_steps):
        rho = transport_step(rho, state.u, dt)
        low, high = float(np.min(rho.values)), float(np.max(rho.values))
        if low < lower or high > upper:
            raise DensityBoundError(
                f"density bound violated at t̃={times[n + 1]:.4g}: range [{low:.4g}, {high:.4g}] "
                f"outside [{lower:.4g}, {upper:.4g}]"
            )
        frozen = coeffs.with_density(rho)
        forcing = -convective_term(state.u) + eulerian_capillary_force(rho, coeffs)
        state = advance(state, frozen, dt, forcing=forcing, mode="variable", stepper=stepper)
        rhos.append(rho)
        us.append(state.u)
        ps.append(state.grad_p)
        mass.append(_mass(rho))
        rho_min.append(low)
        rho_max.append(high)

    drift = abs(mass[-1] - mass[0]) / abs(mass[0])
    if drift > 1e-10:
        logger.warning("Mass drift %.3e over the Eulerian run", drift)
    logger.info(
        "Eulerian run done: %d steps, density range [%.4g, %.4g]", n_steps, min(rho_min), max(rho_max)
    )

    grad_p = [ps[0]] + ps
    u_traj = Trajectory(
        times=tuple(times), u=tuple(us), grad_p=tuple(grad_p), frame=Frame.EULERIAN, scaling=Scaling.UNIT_VISCOSITY
    )
    rho_traj = Trajectory(
        times=tuple(times),
        u=tuple(rhos),
        frame=Frame.EULERIAN,
        scaling=Scaling.UNIT_VISCOSITY,
        quantity="density",
    )
    return EulerianRun(
        rho=pushforward_inverse_rescale(rho_traj, coeffs.mu_bar),
        u=pushforward_inverse_rescale(u_traj, coeffs.mu_bar),
        mass=tuple(mass),
        rho_min=tuple(rho_min),
        rho_max=tuple(rho_max),
    )
