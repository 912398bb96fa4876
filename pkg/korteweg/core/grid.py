"""Периодическая сетка на торе [0, 2π)^dim и её спектральные таблицы."""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

TORUS_LENGTH = 2.0 * math.pi


class Grid(BaseModel):
    """Равномерная сетка n_points^dim на торе периода 2π."""

    model_config = ConfigDict(frozen=True)

    n_points: int = 64
    dim: int = 2

    @field_validator("n_points")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {value}")
        return value

    @field_validator("dim")
    @classmethod
    def _supported_dim(cls, value: int) -> int:
        if value == 3:
            raise ValueError("dim=3 is reserved: only 2-D kernels are implemented")
        if value != 2:
            raise ValueError(f"dim must be 2, got {value}")
        return value

    @property
    def length(self) -> float:
        return TORUS_LENGTH

    @property
    def spacing(self) -> float:
        # n_points — степень двойки, поэтому spacing * n_points == length точно
        return self.length / self.n_points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def dealias_cutoff(self) -> float:
        """Граница правила 2/3: (2/3)·(n_points/2)."""
        return (2.0 / 3.0) * (self.n_points / 2)

    def tables(self) -> "SpectralTables":
        return _tables(self.n_points, self.dim)


@dataclass(frozen=True)
class SpectralTables:
    """Волновые числа и маски, общие для всех полей одной сетки.

    k — полные целые частоты (лапласиан, тепловое ядро);
    kd — частоты для производных нечётного порядка (строка/столбец Найквиста обнулены).
    """

    coords: np.ndarray
    k: np.ndarray
    k2: np.ndarray
    kd: np.ndarray
    kd2: np.ndarray
    kd2_safe: np.ndarray
    dealias_mask: np.ndarray


@lru_cache(maxsize=16)
def _tables(n_points: int, dim: int) -> SpectralTables:
    freqs = np.fft.fftfreq(n_points, d=1.0 / n_points)
    freqs_d = freqs.copy()
    freqs_d[n_points // 2] = 0.0
    k = np.stack(np.meshgrid(*([freqs] * dim), indexing="ij"))
    kd = np.stack(np.meshgrid(*([freqs_d] * dim), indexing="ij"))
    x1d = np.arange(n_points) * (TORUS_LENGTH / n_points)
    coords = np.stack(np.meshgrid(*([x1d] * dim), indexing="ij"))

    k2 = np.sum(k**2, axis=0)
    kd2 = np.sum(kd**2, axis=0)
    kd2_safe = np.where(kd2 == 0.0, 1.0, kd2)
    cutoff = (2.0 / 3.0) * (n_points / 2)
    dealias_mask = np.all(np.abs(k) <= cutoff, axis=0)

    for arr in (coords, k, k2, kd, kd2, kd2_safe, dealias_mask):
        arr.setflags(write=False)
    return SpectralTables(
        coords=coords, k=k, k2=k2, kd=kd, kd2=kd2, kd2_safe=kd2_safe, dealias_mask=dealias_mask
    )
