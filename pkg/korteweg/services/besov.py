"""Сервис Литтлвуда-Пэли: диадические блоки, однородные нормы Бесова, разложение Бони.

Профиль χ(r) ≡ 1 при r ≤ 3/4 и ≡ 0 при r ≥ 4/3, между ними — гладкая ступенька на exp(−1/x).
φ(ξ) = χ(ξ/2) − χ(ξ), блоки Δ̇_j = φ(2^{−j}D), низкочастотная часть Ṡ_j = χ(2^{−j}D)
(содержит нулевую моду: на торе χ(0) = 1).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from korteweg.core.fields import Field, Representation, ScalarField, random_band_limited
from korteweg.core.grid import Grid
from korteweg.core.operators import dealias, hessian
from korteweg.core.timemesh import TimeExponent, time_aggregate
from korteweg.errors import GridMismatchError, OutOfRangeError

logger = logging.getLogger(__name__)

CHI_INNER = 3.0 / 4.0
CHI_OUTER = 4.0 / 3.0
J_MIN = -2


def _bump(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(r: np.ndarray) -> np.ndarray:
    """Гладкая радиальная срезка: 1 на шаре 3/4, 0 вне шара 4/3, невозрастающая."""
    t = (np.asarray(r, dtype=float) - CHI_INNER) / (CHI_OUTER - CHI_INNER)
    t = np.clip(t, 0.0, 1.0)
    a, b = _bump(1.0 - t), _bump(t)
    return a / (a + b)


def phi(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


class BesovParams(BaseModel):
    """Индексы (s, p, r) нормы Ḃ^s_{p,r}; бесконечность — math.inf."""

    model_config = ConfigDict(frozen=True)

    s: float = 1.0
    p: float = 2.0
    r: float = 1.0

    @field_validator("p", "r")
    @classmethod
    def _at_least_one(cls, value: float) -> float:
        if not value >= 1.0:
            raise ValueError(f"Besov integrability/summation index must lie in [1, inf], got {value}")
        return value


@lru_cache(maxsize=256)
def _radial_multiplier(n_points: int, dim: int, j: int, low_pass: bool) -> np.ndarray:
    grid = Grid(n_points=n_points, dim=dim)
    radius = np.sqrt(grid.tables().k2) * 2.0 ** (-j)
    table = chi(radius) if low_pass else phi(radius)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class DyadicPartition:
    """Диадическое разбиение для сетки: j ∈ [j_min, j_max], j_max = log₂(n/2) + 1."""

    grid: Grid

    @property
    def j_min(self) -> int:
        return J_MIN

    @property
    def j_max(self) -> int:
        return int(round(math.log2(self.grid.n_points // 2))) + 1

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        self.check_index(j)
        return _radial_multiplier(self.grid.n_points, self.grid.dim, j, False)

    def low_pass(self, j: int) -> np.ndarray:
        """χ(2^{−j}|k|) — символ Ṡ_j; j может выходить за [j_min, j_max]."""
        return _radial_multiplier(self.grid.n_points, self.grid.dim, j, True)

    def check_index(self, j: int) -> None:
        if not self.j_min <= j <= self.j_max:
            raise OutOfRangeError(f"dyadic index {j} outside [{self.j_min}, {self.j_max}]")

    def partition_deviation(self) -> float:
        """max по ненулевым частотам сетки |Σ_j φ(2^{−j}ξ) − 1|."""
        total = sum(self.multiplier(j) for j in self.indices)
        nonzero = self.grid.tables().k2 > 0
        return float(np.max(np.abs(total[nonzero] - 1.0)))


def partition_for(grid: Grid) -> DyadicPartition:
    return DyadicPartition(grid)


def _apply_multiplier(field: Field, table: np.ndarray) -> Field:
    extra = (None,) * field.rank
    out = type(field)(field.grid, table[extra] * field.coefficients, Representation.SPECTRAL)
    return out.to_physical()


def dyadic_block(u: Field, j: int) -> Field:
    """Δ̇_j u в физическом представлении."""
    return _apply_multiplier(u, partition_for(u.grid).multiplier(j))


def low_frequency_cutoff(u: Field, j: int) -> Field:
    """Ṡ_j u = χ(2^{−j}D)u."""
    return _apply_multiplier(u, partition_for(u.grid).low_pass(j))


def array_lp_norm(values: np.ndarray, component_axes: int, cell_volume: float, p: float) -> float:
    """L^p-норма по сетке; первые component_axes осей сворачиваются в поточечную евклидову длину."""
    if component_axes:
        magnitude = np.sqrt(np.sum(values**2, axis=tuple(range(component_axes))))
    else:
        magnitude = np.abs(values)
    if math.isinf(p):
        return float(np.max(magnitude))
    return float((cell_volume * np.sum(magnitude**p)) ** (1.0 / p))


def lp_norm(u: Field, p: float) -> float:
    """Дискретная L^p-норма с весами h^dim; для векторов и тензоров — поточечная евклидова длина."""
    return array_lp_norm(u.values, u.rank, u.grid.cell_volume, p)


def block_norms(u: Field, p: float) -> dict[int, float]:
    partition = partition_for(u.grid)
    return {j: lp_norm(dyadic_block(u, j), p) for j in partition.indices}


def _aggregate(weighted: Sequence[float], r: float) -> float:
    seq = np.asarray(weighted, dtype=float)
    if math.isinf(r):
        return float(np.max(seq)) if seq.size else 0.0
    return float(np.sum(seq**r) ** (1.0 / r))


def besov_norm(u: Field, params: BesovParams) -> float:
    """‖(2^{js}‖Δ̇_j u‖_{L^p})_j‖_{ℓ^r} по j ∈ [j_min, j_max]."""
    norms = block_norms(u, params.p)
    return _aggregate([2.0 ** (j * params.s) * b for j, b in norms.items()], params.r)


def hessian_besov_norm(u: Field, params: BesovParams) -> float:
    """‖∇²u‖_{Ḃ^s_{p,r}}: блоки полного гессиана, Δ̇_j ∂_i∂_l u = ∂_i∂_l Δ̇_j u."""
    weighted = []
    for j in partition_for(u.grid).indices:
        h = hessian(dyadic_block(u, j))
        b = array_lp_norm(h, 2 + u.rank, u.grid.cell_volume, params.p)
        weighted.append(2.0 ** (j * params.s) * b)
    return _aggregate(weighted, params.r)


def block_table(u: Field, params: BesovParams) -> list[dict]:
    """Строки для lp-analyze: {j, block_L2, block_Lp, weighted_2js}."""
    rows = []
    for j in partition_for(u.grid).indices:
        block = dyadic_block(u, j)
        block_lp = lp_norm(block, params.p)
        rows.append(
            {
                "j": j,
                "block_L2": lp_norm(block, 2.0),
                "block_Lp": block_lp,
                "weighted_2js": 2.0 ** (j * params.s) * block_lp,
            }
        )
    return rows


@dataclass(frozen=True)
class BonyDecomposition:
    t_uv: Field
    t_vu: Field
    remainder: Field
    residue: float


def bony_decompose(u: ScalarField, v: Field) -> BonyDecomposition:
    """uv = T_u v + T_v u + R(u, v); все произведения — с правилом 2/3.

    Нулевые моды входят в Ṡ, поэтому T_u v содержит ū(v − v̄), T_v u — v̄(u − ū),
    а произведение ū·v̄ относится к остатку R.
    """
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")
    partition = partition_for(u.grid)
    extra = (None,) * v.rank
    blocks_u = {j: dyadic_block(u, j).values for j in partition.indices}
    blocks_v = {j: dyadic_block(v, j).values for j in partition.indices}

    t_uv = np.zeros_like(v.values)
    t_vu = np.zeros_like(v.values)
    rem = np.zeros_like(v.values)
    for j in partition.indices:
        low_u = low_frequency_cutoff(u, j - 1).values
        low_v = low_frequency_cutoff(v, j - 1).values
        t_uv += low_u[extra] * blocks_v[j]
        t_vu += low_v * blocks_u[j][extra]
        for j2 in (j - 1, j, j + 1):
            if j2 in blocks_v:
                rem += blocks_u[j][extra] * blocks_v[j2]
    rem += u.mean() * np.mean(v.values, axis=tuple(range(-u.grid.dim, 0)), keepdims=True)

    cls = type(v)
    t_uv_f = dealias(cls(v.grid, t_uv))
    t_vu_f = dealias(cls(v.grid, t_vu))
    rem_f = dealias(cls(v.grid, rem))
    product = dealias(cls(v.grid, u.values[extra] * v.values))
    total = t_uv_f.values + t_vu_f.values + rem_f.values
    denom = float(np.linalg.norm(product.values))
    residue = float(np.linalg.norm(total - product.values) / denom) if denom > 0 else 0.0
    logger.debug("Bony decomposition residue %.3e", residue)
    return BonyDecomposition(t_uv_f, t_vu_f, rem_f, residue)


def time_integrated_norm(
    fields: Sequence[Field],
    times: Sequence[float],
    params: BesovParams,
    time_exponent: TimeExponent = 1,
) -> float:
    """‖u‖_{L^q_T Ḃ^s_{p,r}}: трапеции для q = 1, 2; максимум по узлам для q = ∞."""
    if len(fields) == 0:
        raise OutOfRangeError("cannot integrate an empty trajectory")
    return time_aggregate([besov_norm(f, params) for f in fields], times, time_exponent)


def measure_paraproduct_constant(
    grid: Grid, params: BesovParams, n_samples: int = 8, seed: int = 0
) -> float:
    """max ‖T_u v‖_{Ḃ^s_{p,r}} / (‖u‖_∞ ‖v‖_{Ḃ^s_{p,r}})."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        u = random_band_limited(grid, rng)
        v = random_band_limited(grid, rng)
        t_uv = bony_decompose(u, v).t_uv
        ratio = besov_norm(t_uv, params) / (lp_norm(u, math.inf) * besov_norm(v, params))
        worst = max(worst, ratio)
    logger.info("Paraproduct constant on %d samples at n=%d: %.4f", n_samples, grid.n_points, worst)
    return worst


def measure_composition_constant(
    grid: Grid,
    params: BesovParams,
    fn: Callable[[np.ndarray], np.ndarray] = np.square,
    n_samples: int = 8,
    seed: int = 0,
) -> float:
    """max ‖F(u)‖_{Ḃ^s_{p,r}} / ‖u‖_{Ḃ^s_{p,r}} для F(0) = 0 (по умолчанию F(u) = u²)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        u = random_band_limited(grid, rng)
        composed = dealias(ScalarField(grid, fn(u.values)))
        worst = max(worst, besov_norm(composed, params) / besov_norm(u, params))
    logger.info("Composition constant on %d samples at n=%d: %.4f", n_samples, grid.n_points, worst)
    return worst


def embedding_ratio(u: Field, s: float, s_prime: float, p: float = 2.0, r: float = 1.0) -> float:
    """‖u‖_{Ḃ^{s'}} / (2^{j_max(s'−s)} ‖u‖_{Ḃ^s}) при s' < s.

    Блок j входит в обе нормы с весами, отличающимися в 2^{j(s'−s)}, поэтому
    отношение лежит в [1, 2^{(j_max − j_min)(s − s')}]; к нижней границе
    прижимаются высокочастотные поля, к верхней — низкочастотные.
    """
    if not s_prime < s:
        raise OutOfRangeError(f"embedding needs s' < s, got s'={s_prime}, s={s}")
    high = besov_norm(u, BesovParams(s=s, p=p, r=r))
    if high == 0.0:
        return 0.0
    low = besov_norm(u, BesovParams(s=s_prime, p=p, r=r))
    j_max = partition_for(u.grid).j_max
    ratio = low / (2.0 ** (j_max * (s_prime - s)) * high)
    logger.debug("Embedding ratio s=%.2f -> s'=%.2f: %.4f", s, s_prime, ratio)
    return ratio
