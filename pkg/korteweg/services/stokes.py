"""Шаг по времени для задачи Стокса с неоднородной дивергенцией и свободное решение u_L.

Постоянный оператор: ∂_t u − Δu + ∇P = f, div u = div M.
Переменный оператор: ∂_t u − a·div(b·D(u)) + a∇P = f с a = 1/ρ₀, b = μ(ρ₀); остаток
a·div(b·D(u)) − Δu и (a − 1)∇P_lag идут в явную часть.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Literal, Optional, Sequence

import numpy as np

from korteweg.core.fields import ScalarField, VectorField, check_same_grid
from korteweg.core.operators import (
    differentiate,
    gradient_inverse_laplacian,
    heat_propagate,
    inverse_laplacian,
    l2_norm,
    leray_project,
    multiply,
)
from korteweg.errors import NoContractionError, NonSolenoidalError, OutOfRangeError, StepRejectedError
from korteweg.services.besov import block_norms, partition_for
from korteweg.services.coefficients import Coefficients
from korteweg.services.forcings import capillary_source
from korteweg.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

Mode = Literal["constant", "variable"]
Stepper = Literal["imex1", "cnab2"]

STEP_TOLERANCE = 1e-9
GROWTH_LIMIT = 2.0
MAX_HALVINGS = 6
IMPLICIT_TOL = 1e-12
IMPLICIT_MAX_ITERS = 60


@dataclass(frozen=True)
class StokesState:
    u: VectorField
    grad_p: VectorField
    time: float = 0.0
    # явная часть предыдущего шага (для AB2)
    explicit_prev: Optional[VectorField] = None

    @classmethod
    def initial(cls, u: VectorField, time: float = 0.0) -> "StokesState":
        return cls(u=u, grad_p=VectorField.zeros(u.grid), time=time)


def check_solenoidal(u: VectorField, tol: float = 1e-10) -> None:
    residual = l2_norm(differentiate(u, "divergence"))
    scale = max(1.0, l2_norm(differentiate(u, "jacobian")))
    if residual > tol * scale:
        raise NonSolenoidalError(f"initial velocity is not divergence-free: ‖div u‖₂ = {residual:.3e}")


def variable_remainder(u: VectorField, coeffs: Coefficients) -> VectorField:
    """a·div(b·D(u)) − Δu."""
    stress = multiply(coeffs.mu_rho0, differentiate(u, "sym_double_gradient"))
    return multiply(coeffs.inv_rho0, differentiate(stress, "divergence")) - differentiate(u, "laplacian")


def _pressure_lag_term(grad_p: VectorField, coeffs: Coefficients) -> VectorField:
    """(a − 1)∇P_lag."""
    one = ScalarField.constant(coeffs.grid, 1.0)
    return multiply(coeffs.inv_rho0 - one, grad_p)


def stokes_step(
    state: StokesState,
    coeffs: Coefficients,
    dt: float,
    forcing: Optional[VectorField] = None,
    div_m: Optional[ScalarField] = None,
    mode: Mode = "constant",
    stepper: Stepper = "imex1",
    explicit_velocity: Optional[VectorField] = None,
    pressure_lag: Optional[VectorField] = None,
    symmetric_gradient: bool = False,
    growth_limit: float = GROWTH_LIMIT,
) -> StokesState:
    """Один шаг IMEX: Лапласиан неявно, остальное явно, давление — проектором Лере.

    explicit_velocity / pressure_lag задают, где вычисляется явная часть переменного
    оператора (по умолчанию — текущее состояние). symmetric_gradient восстанавливает
    форму −div D(u) постоянного оператора: ∇P = ∇Π + ∇ div M.
    """
    if dt <= 0:
        raise OutOfRangeError(f"time step must be positive, got {dt}")
    grid = state.u.grid
    forcing = forcing if forcing is not None else VectorField.zeros(grid)
    div_m = div_m if div_m is not None else ScalarField.zeros(grid)
    check_same_grid(state.u, forcing, div_m, coeffs.rho0)
    k2 = grid.tables().k2

    frozen = explicit_velocity is not None
    if mode == "variable":
        w = explicit_velocity if frozen else state.u
        lag = pressure_lag if pressure_lag is not None else state.grad_p
        explicit = variable_remainder(w, coeffs) - _pressure_lag_term(lag, coeffs)
    elif mode == "constant":
        explicit = VectorField.zeros(grid)
    else:
        raise OutOfRangeError(f"unknown operator mode: {mode}")

    if stepper == "cnab2" and state.explicit_prev is not None and not frozen:
        extrapolated = explicit * 1.5 - state.explicit_prev * 0.5
    else:
        extrapolated = explicit
    rhs = forcing + extrapolated

    c_u = state.u.coefficients
    c_rhs = rhs.coefficients
    if stepper == "imex1":
        c_star = (c_u + dt * c_rhs) / (1.0 + dt * k2)
    elif stepper == "cnab2":
        c_star = ((1.0 - 0.5 * dt * k2) * c_u + dt * c_rhs) / (1.0 + 0.5 * dt * k2)
    else:
        raise OutOfRangeError(f"unknown stepper: {stepper}")
    u_star = VectorField(grid, c_star, "spectral").to_physical()

    solenoidal, _ = leray_project(u_star)
    correction = gradient_inverse_laplacian(div_m)
    u_new = solenoidal + correction

    if stepper == "imex1":
        diffusion = differentiate(u_new, "laplacian")
    else:
        diffusion = differentiate(u_new + state.u, "laplacian") * 0.5
    _, grad_p = leray_project(rhs - (u_new - state.u) * (1.0 / dt) + diffusion)
    if symmetric_gradient:
        grad_p = grad_p + differentiate(div_m, "gradient")

    budget = l2_norm(state.u) + dt * l2_norm(forcing) + l2_norm(correction)
    if frozen:
        budget += dt * l2_norm(explicit)
    size = l2_norm(u_new)
    if not math.isfinite(size) or size > growth_limit * budget + 1e-300:
        raise StepRejectedError(
            f"step rejected at t={state.time:.6g}, halve dt: ‖u‖ grew to {size:.3e} (budget {budget:.3e})"
        )

    residual = l2_norm(differentiate(u_new, "divergence") - div_m + ScalarField.constant(grid, div_m.mean()))
    if residual > STEP_TOLERANCE * max(1.0, l2_norm(div_m)):
        logger.warning("Divergence residual %.3e after step at t=%.6g", residual, state.time)

    return StokesState(u=u_new, grad_p=grad_p, time=state.time + dt, explicit_prev=explicit)


def advance(
    state: StokesState,
    coeffs: Coefficients,
    dt: float,
    max_halvings: int = MAX_HALVINGS,
    **step_kwargs,
) -> StokesState:
    """stokes_step с повтором отвергнутого шага двумя половинными (до max_halvings раз)."""
    try:
        return stokes_step(state, coeffs, dt, **step_kwargs)
    except StepRejectedError:
        if max_halvings <= 0:
            raise
        logger.debug("Step rejected at t=%.6g, retrying with dt=%.3e", state.time, dt / 2)
        restart = replace(state, explicit_prev=None)
        half = advance(restart, coeffs, dt / 2, max_halvings - 1, **step_kwargs)
        done = advance(half, coeffs, dt / 2, max_halvings - 1, **step_kwargs)
        # история AB2 снята с шагом dt/2; следующий шаг dt стартует как IMEX1
        return replace(done, explicit_prev=None)


def implicit_step(
    state: StokesState,
    coeffs: Coefficients,
    dt: float,
    forcing: Optional[VectorField] = None,
    div_m: Optional[ScalarField] = None,
    tol: float = IMPLICIT_TOL,
    max_iters: int = IMPLICIT_MAX_ITERS,
) -> StokesState:
    """Неявный (обратный Эйлер) шаг переменного оператора: явная часть итерируется до неподвижной точки."""
    guess_u, guess_p = state.u, state.grad_p
    change = math.inf
    for it in range(max_iters):
        new = advance(
            state,
            coeffs,
            dt,
            forcing=forcing,
            div_m=div_m,
            mode="variable",
            explicit_velocity=guess_u,
            pressure_lag=guess_p,
        )
        change = l2_norm(new.u - guess_u) + dt * l2_norm(new.grad_p - guess_p)
        scale = l2_norm(new.u) + dt * l2_norm(new.grad_p)
        guess_u, guess_p = new.u, new.grad_p
        if change <= tol * scale or change == 0.0:
            logger.debug("Implicit step at t=%.6g converged in %d iterations", state.time, it + 1)
            return replace(new, explicit_prev=None)
    raise NoContractionError(
        f"variable-coefficient step at t={state.time:.6g} did not converge (change {change:.3e})"
    )


def unit_time_mesh(coeffs: Coefficients, horizon: float, n_steps: int) -> np.ndarray:
    """Узлы t̃ = μ̄t, t ∈ [0, horizon], в системе с единичной вязкостью."""
    if horizon <= 0:
        raise OutOfRangeError(f"horizon must be positive, got {horizon}")
    if n_steps < 1:
        raise OutOfRangeError(f"n_steps must be >= 1, got {n_steps}")
    return np.linspace(0.0, coeffs.mu_bar * horizon, n_steps + 1)


def free_solution(
    coeffs: Coefficients,
    u0: VectorField,
    horizon: float,
    n_steps: int,
    mode: Mode = "constant",
    exact: bool = True,
    stepper: Stepper = "imex1",
) -> Trajectory:
    """u_L и ∇P_L на [0, μ̄·horizon] в системе с единичной вязкостью.

    mode="constant": ∂_t u_L − Δu_L = −κℙF, ∇P_L = −κℚF, F = div[k(ρ₀)∇ρ₀⊗∇ρ₀];
    при exact=True — точное решение e^{tΔ}u₀/μ̄ + (I − e^{tΔ})Δ⁻¹κℙF, иначе — шаги stokes_step.
    mode="variable": ∂_t u_L − (1/ρ₀)div(μ(ρ₀)D(u_L)) + (1/ρ₀)∇P_L = F₀³ неявными шагами.
    """
    check_same_grid(u0, coeffs.rho0)
    check_solenoidal(u0)
    times = unit_time_mesh(coeffs, horizon, n_steps)
    u_start = u0 * (1.0 / coeffs.mu_bar)
    kappa = coeffs.kappa_over_mu2
    source = capillary_source(coeffs)

    if mode == "constant" and exact:
        pf, qf = leray_project(source)
        u_inf = inverse_laplacian(pf) * kappa
        grad_p = qf * (-kappa)
        u = [heat_propagate(u_start, t) + u_inf - heat_propagate(u_inf, t) for t in times]
        return Trajectory(times=tuple(times), u=tuple(u), grad_p=tuple(grad_p for _ in times))

    dt = float(times[1] - times[0])
    state = StokesState.initial(u_start)
    us, ps = [u_start], []
    if mode == "constant":
        forcing = source * (-kappa)
        for _ in range(n_steps):
            state = advance(state, coeffs, dt, forcing=forcing, mode="constant", stepper=stepper)
            us.append(state.u)
            ps.append(state.grad_p)
    elif mode == "variable":
        forcing = multiply(coeffs.inv_rho0, source) * (-kappa)
        for _ in range(n_steps):
            state = implicit_step(state, coeffs, dt, forcing=forcing)
            us.append(state.u)
            ps.append(state.grad_p)
    else:
        raise OutOfRangeError(f"unknown operator mode: {mode}")
    # давление в t₀ не определяется шагом; берётся значение первого шага
    grad_p_series = [ps[0]] + ps
    return Trajectory(times=tuple(times), u=tuple(us), grad_p=tuple(grad_p_series))


@dataclass(frozen=True)
class EnvelopeFit:
    C: float
    c: float
    worst_residual: float
    blocks: tuple[int, ...]


def envelope_model(
    times: np.ndarray, js: np.ndarray, initial: np.ndarray, force: np.ndarray, c: float
) -> np.ndarray:
    """e^{−ct4^j}·initial_j + (1 − e^{−ct4^j})/(c·4^j)·force_j на сетке (время, блок)."""
    rate = c * np.outer(times, 4.0 ** js.astype(float))
    decay = np.exp(-rate)
    return decay * initial[None, :] + (1.0 - decay) / (c * 4.0 ** js.astype(float))[None, :] * force[None, :]


def fit_envelope_table(
    times: Sequence[float],
    js: Sequence[int],
    observed: np.ndarray,
    initial: Sequence[float],
    force: Sequence[float],
    c_candidates: Optional[np.ndarray] = None,
) -> EnvelopeFit:
    """Один (C, c) для всех блоков: C — МНК по относительной ошибке, c — перебор по сетке."""
    t = np.asarray(times, dtype=float)
    j = np.asarray(js, dtype=int)
    y = np.asarray(observed, dtype=float)
    a = np.asarray(initial, dtype=float)
    f = np.asarray(force, dtype=float)
    if y.shape != (t.size, j.size):
        raise OutOfRangeError(f"observed table must have shape {(t.size, j.size)}, got {y.shape}")
    if c_candidates is None:
        c_candidates = np.logspace(-3, 1, 401)
    mask = y > 1e-12 * max(float(np.max(y, initial=0.0)), 1e-300)
    if not np.any(mask):
        raise OutOfRangeError("no nonzero block norms to fit")

    best: Optional[EnvelopeFit] = None
    for c in c_candidates:
        model = envelope_model(t, j, a, f, float(c))
        ok = mask & (model > 0)
        if not np.any(ok):
            continue
        ratio = model[ok] / y[ok]
        C = float(np.sum(ratio) / np.sum(ratio**2))
        worst = float(np.max(np.abs(C * ratio - 1.0)))
        if best is None or worst < best.worst_residual:
            best = EnvelopeFit(C=C, c=float(c), worst_residual=worst, blocks=tuple(int(x) for x in j))
    if best is None:
        raise OutOfRangeError("envelope model vanishes on every observed block")
    return best


def fit_dyadic_envelope(traj: Trajectory, force: Optional[VectorField] = None) -> EnvelopeFit:
    """Подгонка ‖Δ̇_j u_L(t)‖₂ под огибающую полугруппы; force — κℙF (None — без источника)."""
    grid = traj.grid
    partition = partition_for(grid)
    initial_norms = block_norms(traj.u[0], 2.0)
    force_norms = block_norms(force, 2.0) if force is not None else {j: 0.0 for j in partition.indices}
    scale = max(max(initial_norms.values()), max(force_norms.values()), 1e-300)
    active = [j for j in partition.indices if max(initial_norms[j], force_norms[j]) > 1e-10 * scale]
    rows = [block_norms(u, 2.0) for u in traj.u]
    observed = np.array([[row[j] for j in active] for row in rows])
    fit = fit_envelope_table(
        traj.times,
        active,
        observed,
        [initial_norms[j] for j in active],
        [force_norms[j] for j in active],
    )
    logger.info(
        "Dyadic envelope over blocks %s: C=%.4g c=%.4g worst residual %.2f%%",
        active,
        fit.C,
        fit.c,
        100.0 * fit.worst_residual,
    )
    return fit
