"""Траектории (u, ∇P) на равномерной сетке по времени, норма E_T и пересчёт масштаба вязкости."""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from korteweg.core.fields import Field, VectorField
from korteweg.core.timemesh import time_aggregate, uniform_step
from korteweg.errors import OutOfRangeError
from korteweg.services.besov import BesovParams, besov_norm, hessian_besov_norm

logger = logging.getLogger(__name__)


class Frame(str, Enum):
    LAGRANGIAN = "lagrangian"
    EULERIAN = "eulerian"


class Scaling(str, Enum):
    ORIGINAL = "original"
    UNIT_VISCOSITY = "unit_viscosity"


@dataclass(frozen=True)
class Trajectory:
    """Значения поля (скорости или плотности) и, для скорости, ∇P в узлах равномерной сетки."""

    times: tuple[float, ...]
    u: tuple[Field, ...]
    grad_p: Optional[tuple[VectorField, ...]] = None
    frame: Frame = Frame.LAGRANGIAN
    scaling: Scaling = Scaling.UNIT_VISCOSITY
    quantity: str = "velocity"

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "u", tuple(self.u))
        if self.grad_p is not None:
            object.__setattr__(self, "grad_p", tuple(self.grad_p))
        if not self.u:
            raise OutOfRangeError("trajectory must hold at least one sample")
        if len(self.u) != len(self.times):
            raise OutOfRangeError(f"{len(self.u)} samples for {len(self.times)} mesh times")
        if self.grad_p is not None and len(self.grad_p) != len(self.times):
            raise OutOfRangeError("pressure samples do not match the time mesh")
        uniform_step(self.times)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dt(self) -> float:
        return uniform_step(self.times)

    @property
    def final_time(self) -> float:
        return self.times[-1]

    @property
    def grid(self):
        return self.u[0].grid

    def pressure(self) -> tuple[VectorField, ...]:
        """∇P, либо нули, если давление не хранится."""
        if self.grad_p is None:
            return tuple(VectorField.zeros(self.grid) for _ in self.times)
        return self.grad_p

    def time_derivative(self) -> list[Field]:
        """∂_t u разностями по сетке: назад во внутренних узлах, вперёд в t₀."""
        if len(self) == 1:
            return [type(self.u[0]).zeros(self.grid)]
        dt = self.dt
        diffs = [(self.u[k] - self.u[k - 1]) * (1.0 / dt) for k in range(1, len(self))]
        return [diffs[0]] + diffs

    def truncated(self, n_samples: int) -> "Trajectory":
        grad_p = None if self.grad_p is None else self.grad_p[:n_samples]
        return replace(self, times=self.times[:n_samples], u=self.u[:n_samples], grad_p=grad_p)


def trajectory_difference(a: Trajectory, b: Trajectory) -> Trajectory:
    if len(a) != len(b) or not np.allclose(a.times, b.times, rtol=0.0, atol=1e-12):
        raise OutOfRangeError("trajectories live on different time meshes")
    grad_p = tuple(pa - pb for pa, pb in zip(a.pressure(), b.pressure()))
    return replace(a, u=tuple(ua - ub for ua, ub in zip(a.u, b.u)), grad_p=grad_p)


@dataclass(frozen=True)
class EnergyNorm:
    """‖(u, ∇P)‖_{E_T}: value = Linf_u + L1_dtu + L1_lap_u + L1_gradP."""

    parts: dict[str, float] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return (
            self.parts["Linf_u"] + self.parts["L1_dtu"] + self.parts["L1_lap_u"] + self.parts["L1_gradP"]
        )


def energy_norm(traj: Trajectory, params: BesovParams, viscosity: float = 1.0) -> EnergyNorm:
    """Норма E_T с ∂_t u по разностям и ∇²u как полным гессианом."""
    times = traj.times
    parts = {
        "Linf_u": time_aggregate([besov_norm(u, params) for u in traj.u], times, "inf"),
        "L1_dtu": time_aggregate([besov_norm(d, params) for d in traj.time_derivative()], times, 1),
        "L1_lap_u": viscosity * time_aggregate([hessian_besov_norm(u, params) for u in traj.u], times, 1),
        "L1_gradP": time_aggregate([besov_norm(p, params) for p in traj.pressure()], times, 1),
    }
    return EnergyNorm(parts)


def _check_mu_bar(mu_bar: float) -> float:
    if mu_bar <= 0:
        raise OutOfRangeError(f"mu_bar must be positive, got {mu_bar}")
    return float(mu_bar)


def _scaled(traj: Trajectory, time_factor: float, amplitude: float, scaling: Scaling) -> Trajectory:
    u_factor = amplitude if traj.quantity == "velocity" else 1.0
    grad_p = None if traj.grad_p is None else tuple(p * (amplitude**2) for p in traj.grad_p)
    return replace(
        traj,
        times=tuple(t * time_factor for t in traj.times),
        u=tuple(u * u_factor for u in traj.u),
        grad_p=grad_p,
        scaling=scaling,
    )


def rescale_to_unit_viscosity(traj: Trajectory, mu_bar: float) -> Trajectory:
    """ũ(t̃) = u(t̃/μ̄)/μ̄ на сетке t̃ = μ̄t, ∇P̃ = ∇P/μ̄²; плотность не меняется."""
    mu_bar = _check_mu_bar(mu_bar)
    if traj.scaling is not Scaling.ORIGINAL:
        raise OutOfRangeError("trajectory is already in the unit-viscosity frame")
    return _scaled(traj, mu_bar, 1.0 / mu_bar, Scaling.UNIT_VISCOSITY)


def pushforward_inverse_rescale(traj: Trajectory, mu_bar: float) -> Trajectory:
    """u(t) = μ̄ũ(μ̄t): времена делятся на μ̄, u умножается на μ̄, ∇P — на μ̄²."""
    mu_bar = _check_mu_bar(mu_bar)
    if traj.scaling is not Scaling.UNIT_VISCOSITY:
        raise OutOfRangeError("trajectory is already in the original frame")
    return _scaled(traj, 1.0 / mu_bar, mu_bar, Scaling.ORIGINAL)

