"""Контейнеры полей (скаляр/вектор/тензор) с двойным физическим/спектральным представлением.

Преобразование Фурье унитарное: û = fft(u) / sqrt(N) по каждой оси (numpy norm="ortho"),
поэтому Σ|u|² = Σ|û|², а L²-норма на торе равна sqrt(h^dim · Σ|u|²) в обоих представлениях.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, ClassVar

import numpy as np

from korteweg.core.grid import Grid
from korteweg.errors import GridMismatchError, OutOfRangeError


class Representation(str, Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"


def forward_transform(values: np.ndarray, dim: int) -> np.ndarray:
    return np.fft.fftn(values, axes=tuple(range(-dim, 0)), norm="ortho")


def inverse_transform(coefficients: np.ndarray, dim: int) -> np.ndarray:
    return np.fft.ifftn(coefficients, axes=tuple(range(-dim, 0)), norm="ortho").real


@dataclass(frozen=True, eq=False)
class Field:
    """Неизменяемое поле ранга `rank` на сетке `grid`.

    data имеет форму (dim,)*rank + grid.shape; физические данные вещественные,
    спектральные — комплексные коэффициенты унитарного ДПФ.
    """

    grid: Grid
    data: np.ndarray
    representation: Representation = Representation.PHYSICAL

    rank: ClassVar[int] = 0
    kind: ClassVar[str] = "field"

    def __post_init__(self) -> None:
        representation = Representation(self.representation)
        dtype = np.float64 if representation is Representation.PHYSICAL else np.complex128
        if representation is Representation.PHYSICAL and np.iscomplexobj(self.data):
            raise OutOfRangeError("physical field data must be real")
        data = np.array(self.data, dtype=dtype)
        expected = (self.grid.dim,) * self.rank + self.grid.shape
        if data.shape != expected:
            raise OutOfRangeError(f"{self.kind} field expects shape {expected}, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "representation", representation)

    @property
    def values(self) -> np.ndarray:
        """Физические значения (без изменения самого поля)."""
        if self.representation is Representation.PHYSICAL:
            return self.data
        return inverse_transform(self.data, self.grid.dim)

    @property
    def coefficients(self) -> np.ndarray:
        """Спектральные коэффициенты (унитарная нормировка)."""
        if self.representation is Representation.SPECTRAL:
            return self.data
        return forward_transform(self.data, self.grid.dim)

    def to_physical(self) -> "Field":
        if self.representation is Representation.PHYSICAL:
            return self
        return self.with_values(self.values)

    def to_spectral(self) -> "Field":
        if self.representation is Representation.SPECTRAL:
            return self
        return self.with_coefficients(self.coefficients)

    def with_values(self, values: np.ndarray) -> "Field":
        return type(self)(self.grid, values, Representation.PHYSICAL)

    def with_coefficients(self, coefficients: np.ndarray) -> "Field":
        return type(self)(self.grid, coefficients, Representation.SPECTRAL)

    def _check_same(self, other: "Field") -> None:
        if type(other) is not type(self):
            raise OutOfRangeError(f"cannot combine {self.kind} with {other.kind}")
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "Field") -> "Field":
        self._check_same(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros((grid.dim,) * cls.rank + grid.shape))


class ScalarField(Field):
    """ρ, ρ₀, P̄, J и прочие скалярные величины."""

    rank = 0
    kind = "scalar"

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> "ScalarField":
        coords = grid.tables().coords
        return cls(grid, np.broadcast_to(fn(*coords), grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def mean(self) -> float:
        return float(np.mean(self.values))


class VectorField(Field):
    """u, ū, v̄, u_L, ∇P̄, M_v̄ — векторные поля из dim компонент."""

    rank = 1
    kind = "vector"

    @classmethod
    def from_functions(cls, grid: Grid, *fns: Callable[..., np.ndarray]) -> "VectorField":
        coords = grid.tables().coords
        return cls(grid, np.stack([np.broadcast_to(fn(*coords), grid.shape) for fn in fns]))


class TensorField(Field):
    """DX, A, adj(DX), D(u) — тензорные поля dim×dim."""

    rank = 2
    kind = "tensor"

    @classmethod
    def identity(cls, grid: Grid) -> "TensorField":
        eye = np.eye(grid.dim).reshape((grid.dim, grid.dim) + (1,) * grid.dim)
        return cls(grid, np.broadcast_to(eye, (grid.dim, grid.dim) + grid.shape))

    def transpose(self) -> "TensorField":
        return self.with_values(np.swapaxes(self.values, 0, 1))


FIELD_KINDS: dict[str, type[Field]] = {
    ScalarField.kind: ScalarField,
    VectorField.kind: VectorField,
    TensorField.kind: TensorField,
}


def check_same_grid(*fields: Field) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    rank: int = 0,
    max_mode: int = 6,
    amplitude: float = 1.0,
) -> Field:
    """Случайное гладкое поле из мод |k_i| ≤ max_mode со средним нулём.

    Коэффициенты выбираются независимо от разрешения сетки, поэтому при измельчении
    сравниваются одни и те же непрерывные функции.
    """
    coords = grid.tables().coords
    n_comp = grid.dim**rank
    out = np.zeros((n_comp,) + grid.shape)
    modes = [
        (k1, k2)
        for k1 in range(0, max_mode + 1)
        for k2 in range(-max_mode, max_mode + 1)
        if (k1 > 0 or k2 > 0)
    ]
    for c in range(n_comp):
        coeffs = rng.standard_normal((len(modes), 2))
        weights = np.array([1.0 / (1.0 + k1 * k1 + k2 * k2) for k1, k2 in modes])
        # нормировка по коэффициентам, а не по значениям на сетке
        scale = amplitude / np.sqrt(np.sum((weights[:, None] * coeffs) ** 2))
        for (k1, k2), w, (a, b) in zip(modes, weights, coeffs):
            phase = k1 * coords[0] + k2 * coords[1]
            out[c] += scale * w * (a * np.cos(phase) + b * np.sin(phase))
    cls = {0: ScalarField, 1: VectorField, 2: TensorField}[rank]
    return cls(grid, out.reshape((grid.dim,) * rank + grid.shape))
