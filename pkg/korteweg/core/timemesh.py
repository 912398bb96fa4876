"""Равномерная сетка по времени и квадратуры по ней."""

from typing import Literal, Sequence

import numpy as np

from korteweg.errors import OutOfRangeError

TimeExponent = Literal[1, 2, "inf"]


def uniform_step(times: Sequence[float], rtol: float = 1e-9) -> float:
    """Шаг равномерной сетки; 0.0 для одной точки. Неравномерная сетка — ошибка."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise OutOfRangeError("time mesh must be a non-empty 1-D sequence")
    if t.size == 1:
        return 0.0
    steps = np.diff(t)
    dt = float(steps[0])
    if dt <= 0 or np.max(np.abs(steps - dt)) > rtol * max(abs(dt), 1.0):
        raise OutOfRangeError("time mesh must be uniform and increasing")
    return dt


def time_aggregate(values: Sequence[float], times: Sequence[float], exponent: TimeExponent) -> float:
    """L¹/L² по трапециям, L^∞ — максимум по узлам."""
    b = np.asarray(values, dtype=float)
    if b.size == 0:
        raise OutOfRangeError("cannot aggregate an empty trajectory")
    if len(times) != b.size:
        raise OutOfRangeError(f"{b.size} samples for {len(times)} mesh times")
    dt = uniform_step(times)
    if exponent in ("inf", float("inf")):
        return float(np.max(b))
    if b.size == 1:
        return 0.0
    if exponent == 1:
        return float(np.trapezoid(b, dx=dt))
    if exponent == 2:
        return float(np.sqrt(np.trapezoid(b**2, dx=dt)))
    raise OutOfRangeError(f"time exponent must be 1, 2 or 'inf', got {exponent}")


def running_integral(values: Sequence[float], times: Sequence[float]) -> np.ndarray:
    """Накопленный интеграл по трапециям: out[k] = ∫_{t₀}^{t_k}."""
    b = np.asarray(values, dtype=float)
    dt = uniform_step(times)
    out = np.zeros_like(b)
    if b.size > 1:
        out[1:] = np.cumsum(0.5 * dt * (b[1:] + b[:-1]))
    return out
