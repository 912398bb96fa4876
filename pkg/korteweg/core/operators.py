"""Спектральные операторы: смена представления, дифференцирование, проектор Лере,
тепловая полугруппа, правило 2/3 и поточечная алгебра с подавлением алиасинга.

Соглашения по индексам: Du_{ij} = ∂_j u_i (якобиан), ∇u = ᵗDu,
D(u)_{ij} = ∂_i u_j + ∂_j u_i, дивергенция тензора — по столбцам: (div T)_i = Σ_m ∂_m T_{mi}.
"""

import logging
from typing import Literal

import numpy as np

from korteweg.core.fields import (
    Field,
    Representation,
    ScalarField,
    TensorField,
    VectorField,
    check_same_grid,
)
from korteweg.errors import OutOfRangeError

logger = logging.getLogger(__name__)

DerivativeKind = Literal["gradient", "divergence", "laplacian", "jacobian", "sym_double_gradient"]


def convert(field: Field, target: Representation | str) -> Field:
    """Переводит поле в нужное представление; идемпотентно."""
    target = Representation(target)
    if target is Representation.SPECTRAL:
        return field.to_spectral()
    return field.to_physical()


def _from_coefficients(cls: type[Field], grid, coefficients: np.ndarray) -> Field:
    return cls(grid, coefficients, Representation.SPECTRAL).to_physical()


def differentiate(field: Field, kind: DerivativeKind) -> Field:
    """Точное спектральное дифференцирование (умножение на i·k)."""
    grid = field.grid
    tables = grid.tables()
    ik = 1j * tables.kd
    c = field.coefficients

    if kind == "laplacian":
        return _from_coefficients(type(field), grid, -tables.k2 * c)

    if kind == "gradient":
        if isinstance(field, ScalarField):
            return _from_coefficients(VectorField, grid, ik * c)
        if isinstance(field, VectorField):
            # ∇u_{ij} = ∂_i u_j
            return _from_coefficients(TensorField, grid, ik[:, None] * c[None, :])
    elif kind == "divergence":
        if isinstance(field, VectorField):
            return _from_coefficients(ScalarField, grid, np.sum(ik * c, axis=0))
        if isinstance(field, TensorField):
            return _from_coefficients(VectorField, grid, np.sum(ik[:, None] * c, axis=0))
    elif kind == "jacobian":
        if isinstance(field, VectorField):
            return _from_coefficients(TensorField, grid, ik[None, :] * c[:, None])
    elif kind == "sym_double_gradient":
        if isinstance(field, VectorField):
            du = ik[None, :] * c[:, None]
            return _from_coefficients(TensorField, grid, du + np.swapaxes(du, 0, 1))
    else:
        raise OutOfRangeError(f"unknown derivative kind: {kind}")
    raise OutOfRangeError(f"{kind} is not defined for a {field.kind} field")


def hessian(field: Field) -> np.ndarray:
    """∇²u как массив формы (dim, dim) + форма компонент поля (для норм E_T)."""
    tables = field.grid.tables()
    c = field.coefficients
    kd = tables.kd
    extra = (None,) * field.rank
    out = np.empty((field.grid.dim, field.grid.dim) + c.shape)
    for i in range(field.grid.dim):
        for j in range(field.grid.dim):
            mult = -(kd[i] * kd[j]) if i != j else -(tables.k[i] ** 2)
            out[i, j] = np.fft.ifftn(
                mult[extra] * c, axes=tuple(range(-field.grid.dim, 0)), norm="ortho"
            ).real
    return out


def leray_project(v: VectorField) -> tuple[VectorField, VectorField]:
    """Разложение v = Pv + Qv: Pv бездивергентно, Qv — градиент; нулевая мода целиком в Pv."""
    tables = v.grid.tables()
    c = v.coefficients
    k_dot_v = np.sum(tables.kd * c, axis=0)
    q = tables.kd * (k_dot_v / tables.kd2_safe)
    p = c - q
    return (
        _from_coefficients(VectorField, v.grid, p),
        _from_coefficients(VectorField, v.grid, q),
    )


def gradient_inverse_laplacian(g: ScalarField) -> VectorField:
    """∇Δ⁻¹g с теми же частотами, что и дивергенция: div(∇Δ⁻¹g) = g − mean(g)."""
    tables = g.grid.tables()
    c = g.coefficients
    phi = np.where(tables.kd2 == 0.0, 0.0, -c / tables.kd2_safe)
    return _from_coefficients(VectorField, g.grid, 1j * tables.kd * phi)


def inverse_laplacian(field: Field) -> Field:
    """Δ⁻¹ на модах k ≠ 0 (нулевая мода обнуляется)."""
    tables = field.grid.tables()
    k2_safe = np.where(tables.k2 == 0.0, 1.0, tables.k2)
    c = np.where(tables.k2 == 0.0, 0.0, -field.coefficients / k2_safe)
    return _from_coefficients(type(field), field.grid, c)


def heat_propagate(field: Field, t: float, viscosity: float = 1.0) -> Field:
    """e^{viscosity·t·Δ}: умножение мод на exp(−viscosity·t·|k|²)."""
    if t < 0:
        raise OutOfRangeError(f"heat propagation time must be >= 0, got {t}")
    if viscosity <= 0:
        raise OutOfRangeError(f"viscosity must be positive, got {viscosity}")
    if t == 0:
        return field
    tables = field.grid.tables()
    factor = np.exp(-viscosity * t * tables.k2)
    return _from_coefficients(type(field), field.grid, factor * field.coefficients)


def dealias(field: Field) -> Field:
    """Правило 2/3; представление сохраняется, повторное применение не меняет ни бита."""
    mask = field.grid.tables().dealias_mask
    truncated = np.where(mask, field.coefficients, 0.0)
    out = type(field)(field.grid, truncated, Representation.SPECTRAL)
    if field.representation is Representation.PHYSICAL:
        return out.to_physical()
    return out


def l2_norm(field: Field) -> float:
    """‖u‖₂ = sqrt(h^dim Σ|u|²), одинаково в обоих представлениях (Парсеваль)."""
    return float(np.sqrt(field.grid.cell_volume * np.sum(np.abs(field.data) ** 2)))


def _dealiased(cls: type[Field], grid, values: np.ndarray) -> Field:
    return dealias(cls(grid, values))


def multiply(a: ScalarField, b: Field) -> Field:
    grid = check_same_grid(a, b)
    extra = (None,) * b.rank
    return _dealiased(type(b), grid, a.values[extra] * b.values)


def dot(x: VectorField, y: VectorField) -> ScalarField:
    grid = check_same_grid(x, y)
    return _dealiased(ScalarField, grid, np.sum(x.values * y.values, axis=0))


def outer(x: VectorField, y: VectorField) -> TensorField:
    grid = check_same_grid(x, y)
    return _dealiased(TensorField, grid, x.values[:, None] * y.values[None, :])


def matvec(a: TensorField, x: VectorField, transpose: bool = False) -> VectorField:
    """(A x)_i = Σ_j A_ij x_j, либо (ᵗA x)_i = Σ_j A_ji x_j."""
    grid = check_same_grid(a, x)
    spec = "ji...,j...->i..." if transpose else "ij...,j...->i..."
    return _dealiased(VectorField, grid, np.einsum(spec, a.values, x.values))


def matmul(a: TensorField, b: TensorField) -> TensorField:
    grid = check_same_grid(a, b)
    return _dealiased(TensorField, grid, np.einsum("ij...,jk...->ik...", a.values, b.values))


def contract(a: TensorField, b: TensorField) -> ScalarField:
    """A:B = Σ_ij A_ij B_ij."""
    grid = check_same_grid(a, b)
    return _dealiased(ScalarField, grid, np.sum(a.values * b.values, axis=(0, 1)))
