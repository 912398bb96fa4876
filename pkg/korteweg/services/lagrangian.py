"""Лагранжевы координаты: поток X_v(t,y) = y + ∫₀ᵗ v(τ,y)dτ, DX, A = DX⁻¹, adj(DX), J = det DX,
композиция с потоком и его обращением, капиллярный член и правая часть условия на дивергенцию.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from korteweg.core.fields import (
    Field,
    ScalarField,
    TensorField,
    VectorField,
    check_same_grid,
    random_band_limited,
)
from korteweg.core.grid import Grid
from korteweg.core.operators import (
    contract,
    dealias,
    differentiate,
    matvec,
    multiply,
    outer,
)
from korteweg.core.timemesh import running_integral, uniform_step
from korteweg.errors import (
    DensityBoundError,
    FlowDegenerateError,
    FlowNotInvertibleError,
    OutOfRangeError,
)
from korteweg.services.besov import BesovParams, besov_norm
from korteweg.services.trajectory import Trajectory

logger = logging.getLogger(__name__)

DET_FLOOR = 0.1
INVERSE_TOL = 1e-10
INVERSE_MAX_ITERS = 200
# число точек интерполяции за один проход (ограничивает память)
_CHUNK = 4096

Direction = Literal["forward", "inverse"]


@dataclass(frozen=True)
class FlowMap:
    grid: Grid
    times: tuple[float, ...]
    displacement: tuple[VectorField, ...]

    def index_of(self, t: float) -> int:
        times = np.asarray(self.times)
        k = int(np.argmin(np.abs(times - t)))
        if abs(times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise OutOfRangeError(f"t={t} is not on the flow time mesh")
        return k

    def at(self, t: float) -> VectorField:
        return self.displacement[self.index_of(t)]


@dataclass(frozen=True)
class JacobianData:
    dx: TensorField
    a: TensorField
    adj: TensorField
    det: ScalarField


def build_flow(velocity: Trajectory) -> FlowMap:
    """Накопленный интеграл по трапециям в фиксированной метке y (без трассировки характеристик)."""
    dt = uniform_step(velocity.times)
    grid = velocity.grid
    d = VectorField.zeros(grid)
    displacement = [d]
    for k in range(1, len(velocity)):
        increment = (velocity.u[k - 1].values + velocity.u[k].values) * (0.5 * dt)
        d = VectorField(grid, displacement[-1].values + increment)
        displacement.append(d)
    return FlowMap(grid=grid, times=velocity.times, displacement=tuple(displacement))


def jacobian_from_displacement(d: VectorField) -> JacobianData:
    """DX = I + Dd, обращение 2×2 в каждой точке; |det DX| < 0.1 — вырождение."""
    grid = d.grid
    dx = TensorField.identity(grid).values + differentiate(d, "jacobian").values
    a11, a12, a21, a22 = dx[0, 0], dx[0, 1], dx[1, 0], dx[1, 1]
    det = a11 * a22 - a12 * a21
    worst = float(np.min(np.abs(det)))
    if worst < DET_FLOOR:
        raise FlowDegenerateError(f"flow degenerate: min |det DX| = {worst:.3e} < {DET_FLOOR}")
    adj = np.stack([np.stack([a22, -a12]), np.stack([-a21, a11])])
    return JacobianData(
        dx=TensorField(grid, dx),
        a=TensorField(grid, adj / det),
        adj=TensorField(grid, adj),
        det=ScalarField(grid, det),
    )


def jacobian_data(flow: FlowMap, t: float) -> JacobianData:
    return jacobian_from_displacement(flow.at(t))


@dataclass(frozen=True)
class SmallnessReport:
    ok: bool
    exceeded_at: Optional[float]
    integral: float


def smallness_check(
    velocity: Trajectory, epsilon0: float, params: Optional[BesovParams] = None
) -> SmallnessReport:
    """Первая точка сетки, где ∫₀ᵗ ‖Dv‖_{Ḃ^{n/p}_{p,1}} > ε₀ (равенство допустимо)."""
    grid = velocity.grid
    if params is None:
        params = BesovParams(s=grid.dim / 2.0, p=2.0, r=1.0)
    norms = [besov_norm(differentiate(v, "jacobian"), params) for v in velocity.u]
    running = running_integral(norms, velocity.times)
    over = np.nonzero(running > epsilon0)[0]
    if over.size:
        k = int(over[0])
        logger.debug("Smallness exceeded at t=%.6g (integral %.4g > %.4g)", velocity.times[k], running[k], epsilon0)
        return SmallnessReport(ok=False, exceeded_at=velocity.times[k], integral=float(running[k]))
    return SmallnessReport(ok=True, exceeded_at=None, integral=float(running[-1]))


def fourier_interpolate(field: Field, points: np.ndarray) -> np.ndarray:
    """Значения тригонометрического интерполянта в произвольных точках points формы (dim, ...).

    Точна для полей с ограниченным спектром; периодична. Мода Найквиста берётся симметрично
    (вещественная часть результата).
    """
    grid = field.grid
    n = grid.n_points
    freqs = np.fft.fftfreq(n, d=1.0 / n)
    coeffs = field.coefficients / n  # унитарные → коэффициенты ряда
    comp_shape = coeffs.shape[: field.rank]
    coeffs = coeffs.reshape((-1, n, n))
    out_shape = points.shape[1:]
    px = points[0].ravel()
    py = points[1].ravel()
    out = np.empty((coeffs.shape[0], px.size))
    for start in range(0, px.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        e1 = np.exp(1j * np.outer(px[sl], freqs))
        e2 = np.exp(1j * np.outer(py[sl], freqs))
        for c in range(coeffs.shape[0]):
            g = e2 @ coeffs[c].T
            out[c, sl] = np.sum(g * e1, axis=1).real
    return out.reshape(comp_shape + out_shape)


def invert_flow(d: VectorField, tol: float = INVERSE_TOL, max_iters: int = INVERSE_MAX_ITERS) -> np.ndarray:
    """Точки y = X⁻¹(x) для узлов x: итерации y ← x − d(y), при несжатии — с демпфированием 0.5."""
    x = d.grid.tables().coords
    y = x - d.values
    damping = 1.0
    previous = math.inf
    for it in range(max_iters):
        d_at_y = fourier_interpolate(d, y)
        residual_field = y + d_at_y - x
        residual = float(np.max(np.abs(residual_field)))
        if residual <= tol:
            logger.debug("Inverse flow converged in %d iterations (residual %.2e)", it, residual)
            return y
        if residual >= previous and damping == 1.0:
            logger.debug("Inverse flow iteration not contracting, damping 0.5")
            damping = 0.5
        previous = residual
        y = y - damping * residual_field
    raise FlowNotInvertibleError(
        f"flow not invertible at tolerance {tol:.1e} after {max_iters} iterations (residual {previous:.2e})"
    )


def compose_with_flow(f: Field, flow: FlowMap, t: float, direction: Direction = "forward") -> Field:
    """forward: f∘X(t); inverse: f∘X(t)⁻¹."""
    check_same_grid(f, flow.displacement[0])
    d = flow.at(t)
    return compose_with_displacement(f, d, direction)


def compose_with_displacement(f: Field, d: VectorField, direction: Direction = "forward") -> Field:
    if not np.any(d.values):
        return f
    if direction == "forward":
        points = d.grid.tables().coords + d.values
    elif direction == "inverse":
        points = invert_flow(d)
    else:
        raise OutOfRangeError(f"unknown composition direction: {direction}")
    return type(f)(f.grid, fourier_interpolate(f, points))


def check_density_floor(rho0: ScalarField, rho_floor: float) -> None:
    lowest = float(np.min(rho0.values))
    if lowest < rho_floor:
        raise DensityBoundError(f"density {lowest:.4g} below positivity floor {rho_floor}")


def apply_law(law: Callable[[np.ndarray], np.ndarray], rho: ScalarField) -> ScalarField:
    """f(ρ) поточечно с последующим правилом 2/3."""
    return dealias(ScalarField(rho.grid, law(rho.values)))


def reciprocal(rho: ScalarField) -> ScalarField:
    return dealias(ScalarField(rho.grid, 1.0 / rho.values))


def lagrangian_capillary_term(
    rho0bar: ScalarField,
    jac: JacobianData,
    k_fn: Callable[[np.ndarray], np.ndarray],
    kappa_over_mu2: float,
    rho_floor: float = 0.1,
) -> VectorField:
    """F³ = −(κ̄/μ̄²)(1/ρ₀) div[k(ρ₀) A·(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀)]."""
    check_density_floor(rho0bar, rho_floor)
    grid = check_same_grid(rho0bar, jac.a)
    if kappa_over_mu2 == 0.0:
        return VectorField.zeros(grid)
    g = matvec(jac.a, differentiate(rho0bar, "gradient"), transpose=True)
    stress = multiply(apply_law(k_fn, rho0bar), outer(matvec(jac.a, g), g))
    force = multiply(reciprocal(rho0bar), differentiate(stress, "divergence"))
    return force * (-kappa_over_mu2)


@dataclass(frozen=True)
class DivergenceConstraint:
    m: VectorField
    div_m: ScalarField
    div_m_contraction: ScalarField

    @property
    def relative_gap(self) -> float:
        scale = float(np.linalg.norm(self.div_m.values))
        gap = float(np.linalg.norm(self.div_m.values - self.div_m_contraction.values))
        return gap / scale if scale > 0 else gap


def divergence_constraint_term(w: VectorField, jac: JacobianData) -> DivergenceConstraint:
    """M = (I − adj DX)·w; div M спектрально и как свёртка Σ ∂_m w_j (δ_mj − (J·A)_mj)."""
    grid = check_same_grid(w, jac.adj)
    m = matvec(TensorField.identity(grid) - jac.adj, w)
    div_m = differentiate(m, "divergence")
    j_times_a = TensorField(grid, jac.det.values[None, None] * jac.a.values)
    complement = TensorField.identity(grid) - j_times_a
    div_m_contraction = contract(differentiate(w, "gradient"), complement)
    return DivergenceConstraint(m=m, div_m=div_m, div_m_contraction=div_m_contraction)


def _history(velocity: VectorField, horizon: float, steps: int) -> Trajectory:
    times = np.linspace(0.0, horizon, steps + 1)
    return Trajectory(times=tuple(times), u=tuple(velocity * (1.0 + t) for t in times))


def _integrated_gradient(velocity: Trajectory, params: BesovParams) -> float:
    norms = [besov_norm(differentiate(v, "jacobian"), params) for v in velocity.u]
    return float(running_integral(norms, velocity.times)[-1])


def measure_a1_constant(
    grid: Grid,
    amplitude: float = 0.05,
    horizon: float = 0.5,
    steps: int = 10,
    n_samples: int = 4,
    seed: int = 0,
) -> float:
    """max ‖I − A(T)‖_{Ḃ^{n/p}_{p,1}} / ‖∇v‖_{L¹_T Ḃ^{n/p}_{p,1}} по малым случайным потокам."""
    params = BesovParams(s=grid.dim / 2.0, p=2.0, r=1.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        velocity = _history(random_band_limited(grid, rng, rank=1, amplitude=amplitude), horizon, steps)
        flow = build_flow(velocity)
        jac = jacobian_data(flow, flow.times[-1])
        deviation = besov_norm(TensorField.identity(grid) - jac.a, params)
        worst = max(worst, deviation / _integrated_gradient(velocity, params))
    logger.info("A1 constant on %d flows at n=%d: %.4f", n_samples, grid.n_points, worst)
    return worst


def measure_a4_constant(
    grid: Grid,
    amplitude: float = 0.05,
    perturbation: float = 0.01,
    horizon: float = 0.5,
    steps: int = 10,
    n_samples: int = 4,
    seed: int = 0,
) -> float:
    """max ‖A_{v₁} − A_{v₂}‖_{L^∞_T Ḃ^{n/p}_{p,1}} / ‖∇(v₁ − v₂)‖_{L¹_T Ḃ^{n/p}_{p,1}}."""
    params = BesovParams(s=grid.dim / 2.0, p=2.0, r=1.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        base = random_band_limited(grid, rng, rank=1, amplitude=amplitude)
        delta = random_band_limited(grid, rng, rank=1, amplitude=perturbation)
        v1 = _history(base, horizon, steps)
        v2 = _history(base + delta, horizon, steps)
        f1, f2 = build_flow(v1), build_flow(v2)
        gap = max(
            besov_norm(jacobian_data(f1, t).a - jacobian_data(f2, t).a, params) for t in f1.times
        )
        dv = _history(delta, horizon, steps)
        worst = max(worst, gap / _integrated_gradient(dv, params))
    logger.info("A4 constant on %d flow pairs at n=%d: %.4f", n_samples, grid.n_points, worst)
    return worst
