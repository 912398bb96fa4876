"""Степенные подгонки и замкнутая оценка времени жизни T₀."""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from korteweg.errors import OutOfRangeError
from korteweg.models import FitResult

logger = logging.getLogger(__name__)


def fit_power_law(points: Sequence[tuple[float, float]]) -> FitResult:
    """МНК для log y = slope·log x + intercept."""
    if len(points) < 3:
        raise OutOfRangeError(f"power-law fit needs at least 3 points, got {len(points)}")
    data = np.asarray(points, dtype=float)
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise OutOfRangeError("power-law fit needs finite positive data")
    log_x, log_y = np.log(data[:, 0]), np.log(data[:, 1])
    design = np.column_stack([log_x, np.ones_like(log_x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, log_y, rcond=None)
    predicted = design @ np.array([slope, intercept])
    ss_res = float(np.sum((log_y - predicted) ** 2))
    ss_tot = float(np.sum((log_y - np.mean(log_y)) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(max(r_squared, 0.0), 1.0),
        points=[(float(a), float(b)) for a, b in zip(log_x, log_y)],
    )


@dataclass(frozen=True)
class LifespanConstants:
    """C и c_ρ₀ оценок; берутся из журналов измеренных констант."""

    C: float = 1.0
    c_rho0: float = 1.0


def capillary_constant(rho0_norms: tuple[float, float], constants: LifespanConstants) -> float:
    """C_ρ₀ = c_ρ₀·(1 + ‖ρ₀−1‖)·‖∇ρ₀‖·(‖∇ρ₀‖ + ‖ρ₀−1‖); rho0_norms = (‖ρ₀−1‖, ‖∇ρ₀‖) в Ḃ^{n/p}_{p,1}."""
    deviation, gradient = rho0_norms
    if deviation < 0 or gradient < 0:
        raise OutOfRangeError("density norms must be nonnegative")
    return constants.c_rho0 * (1.0 + deviation) * gradient * (gradient + deviation)


def lifespan_branches(
    u0_norms: tuple[float, float],
    rho0_norms: tuple[float, float],
    mu_bar: float,
    kappa_bar: float,
    epsilon: float,
    constants: LifespanConstants = LifespanConstants(),
) -> tuple[float, float]:
    """Обе ветви T₀; u0_norms = (‖u₀‖_{Ḃ^{n/p}}, ‖u₀‖_{Ḃ^{n/p+1}}).

    (ε/4)/(C‖u₀‖_{+1} + κC_ρ₀μ̄) и (ε/4)²μ̄/(C‖u₀‖ + κC_ρ₀μ̄)², κ = κ̄/μ̄².
    """
    if mu_bar <= 0 or epsilon <= 0 or constants.C <= 0 or constants.c_rho0 <= 0:
        raise OutOfRangeError("mu_bar, epsilon and the constants must be positive")
    if kappa_bar < 0 or min(u0_norms) < 0:
        raise OutOfRangeError("kappa_bar and velocity norms must be nonnegative")
    norm_s, norm_s_plus1 = u0_norms
    capillary = (kappa_bar / mu_bar**2) * capillary_constant(rho0_norms, constants) * mu_bar
    quarter = epsilon / 4.0

    denominator = constants.C * norm_s_plus1 + capillary
    first = quarter / denominator if denominator > 0 else math.inf
    denominator = (constants.C * norm_s + capillary) ** 2
    second = quarter * quarter * mu_bar / denominator if denominator > 0 else math.inf
    return first, second


def lifespan_predictor(
    u0_norms: tuple[float, float],
    rho0_norms: tuple[float, float],
    mu_bar: float,
    kappa_bar: float,
    epsilon: float,
    constants: LifespanConstants = LifespanConstants(),
) -> float:
    """T₀ = min двух ветвей; ∞ при u₀ = 0 и κ̄ = 0."""
    return min(lifespan_branches(u0_norms, rho0_norms, mu_bar, kappa_bar, epsilon, constants))
