"""Правые части вспомогательных линейных задач: F¹..F³, G³, H¹..H⁴, K¹..K³.

Все величины — в системе с единичной вязкостью (κ = κ̄/μ̄²), в лагранжевых координатах.
A = DX⁻¹ задаётся JacobianData текущего замороженного потока.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

from korteweg.core.fields import ScalarField, TensorField, VectorField, check_same_grid
from korteweg.core.operators import differentiate, matmul, matvec, multiply, outer
from korteweg.errors import OutOfRangeError
from korteweg.services.coefficients import Coefficients
from korteweg.services.lagrangian import (
    JacobianData,
    apply_law,
    lagrangian_capillary_term,
    reciprocal,
)

logger = logging.getLogger(__name__)

Scheme = Literal["aux2_F", "aux3_G", "aux4_H", "aux6_outer", "diff_K"]
SCHEMES: tuple[str, ...] = ("aux2_F", "aux3_G", "aux4_H", "aux6_outer", "diff_K")


@dataclass(frozen=True)
class DifferenceInputs:
    """Данные для K-членов: решения при κ̄ > 0 (индекс κ) и при κ̄ = 0 (base)."""

    jac_base: JacobianData
    u_kappa: VectorField
    u_base: VectorField
    grad_p_kappa: VectorField


def transformed_sym_gradient(z: VectorField, a: TensorField) -> TensorField:
    """D_A(z) = Dz·A + ᵗA·∇z; при A = I совпадает с D(z)."""
    dz = differentiate(z, "jacobian")
    grad_z = differentiate(z, "gradient")
    return matmul(dz, a) + matmul(a.transpose(), grad_z)


def capillary_source(coeffs: Coefficients) -> VectorField:
    """F_{ρ₀} = div[k(ρ₀)∇ρ₀⊗∇ρ₀] (без множителя −κ)."""
    g = coeffs.grad_rho0
    return differentiate(multiply(coeffs.k_rho0, outer(g, g)), "divergence")


def eulerian_capillary_force(rho: ScalarField, coeffs: Coefficients, divide_by_density: bool = True) -> VectorField:
    """−κ(1/ρ)div(k(ρ)∇ρ⊗∇ρ) для текущей эйлеровой плотности ρ."""
    if coeffs.kappa_over_mu2 == 0.0:
        return VectorField.zeros(rho.grid)
    g = differentiate(rho, "gradient")
    force = differentiate(multiply(apply_law(coeffs.k_fn, rho), outer(g, g)), "divergence")
    if divide_by_density:
        force = multiply(reciprocal(rho), force)
    return force * (-coeffs.kappa_over_mu2)


def _identity_minus_transpose(jac: JacobianData, grad_q: VectorField) -> VectorField:
    """(I − ᵗA)∇Q."""
    complement = TensorField.identity(jac.a.grid) - jac.a
    return matvec(complement, grad_q, transpose=True)


def _frame_mismatch(jac: JacobianData, w: VectorField) -> TensorField:
    """A·D_A(w) − D(w) = (A − I)·D_A(w) + D_{A−I}(w); при A = I — точный ноль."""
    a_minus_i = jac.a - TensorField.identity(jac.a.grid)
    return matmul(a_minus_i, transformed_sym_gradient(w, jac.a)) + transformed_sym_gradient(w, a_minus_i)


def _viscous_mismatch(coeffs: Coefficients, jac: JacobianData, w: VectorField) -> TensorField:
    """μ(ρ₀)·A·D_A(w) − D(w) = μ(ρ₀)(A·D_A(w) − D(w)) + (μ(ρ₀) − 1)D(w)."""
    one = ScalarField.constant(coeffs.grid, 1.0)
    return multiply(coeffs.mu_rho0, _frame_mismatch(jac, w)) + multiply(
        coeffs.mu_rho0 - one, differentiate(w, "sym_double_gradient")
    )


def _capillary_difference_stress(coeffs: Coefficients, jac: JacobianData) -> TensorField:
    """k(ρ₀){A[(ᵗA∇ρ₀)⊗((ᵗA−I)∇ρ₀) + ((ᵗA−I)∇ρ₀)⊗∇ρ₀] + (A−I)∇ρ₀⊗∇ρ₀}.

    Развёрнутая форма A(g⊗g) − ∇ρ₀⊗∇ρ₀ с g = ᵗA∇ρ₀; при A = I обращается в ноль точно.
    """
    grid = coeffs.grid
    grad_rho = coeffs.grad_rho0
    g = matvec(jac.a, grad_rho, transpose=True)
    a_minus_i = jac.a - TensorField.identity(grid)
    h = matvec(a_minus_i, grad_rho, transpose=True)
    inner = matvec(jac.a, g)
    stress = outer(inner, h) + outer(matvec(jac.a, h), grad_rho) + outer(matvec(a_minus_i, grad_rho), grad_rho)
    return multiply(coeffs.k_rho0, stress)


def f1_term(coeffs: Coefficients, jac: JacobianData, grad_q: VectorField) -> VectorField:
    return multiply(coeffs.inv_rho0, _identity_minus_transpose(jac, grad_q))


def f2_term(coeffs: Coefficients, jac: JacobianData, w: VectorField) -> VectorField:
    return multiply(coeffs.inv_rho0, differentiate(multiply(coeffs.mu_rho0, _frame_mismatch(jac, w)), "divergence"))


def f3_term(coeffs: Coefficients, jac: JacobianData) -> VectorField:
    return lagrangian_capillary_term(
        coeffs.rho0, jac, coeffs.k_fn, coeffs.kappa_over_mu2, rho_floor=coeffs.rho_floor
    )


def g3_term(coeffs: Coefficients, jac: JacobianData) -> VectorField:
    """G³ = F³ − F₀³ в развёрнутой форме."""
    if coeffs.kappa_over_mu2 == 0.0:
        return VectorField.zeros(coeffs.grid)
    stress = _capillary_difference_stress(coeffs, jac)
    return multiply(coeffs.inv_rho0, differentiate(stress, "divergence")) * (-coeffs.kappa_over_mu2)


def h1_term(coeffs: Coefficients, w_dt: VectorField) -> VectorField:
    one = ScalarField.constant(coeffs.grid, 1.0)
    return multiply(one - coeffs.rho0, w_dt)


def h2_term(jac: JacobianData, grad_q: VectorField) -> VectorField:
    return _identity_minus_transpose(jac, grad_q)


def h3_term(coeffs: Coefficients, jac: JacobianData, w: VectorField) -> VectorField:
    return differentiate(_viscous_mismatch(coeffs, jac, w), "divergence")


def h4_term(coeffs: Coefficients, jac: JacobianData) -> VectorField:
    """H⁴ = −κ div[k(ρ₀) A(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀)]."""
    if coeffs.kappa_over_mu2 == 0.0:
        return VectorField.zeros(coeffs.grid)
    g = matvec(jac.a, coeffs.grad_rho0, transpose=True)
    stress = multiply(coeffs.k_rho0, outer(matvec(jac.a, g), g))
    return differentiate(stress, "divergence") * (-coeffs.kappa_over_mu2)


def h4_difference_term(coeffs: Coefficients, jac: JacobianData) -> VectorField:
    """H⁴_v̄ − H⁴₀ в развёрнутой форме."""
    if coeffs.kappa_over_mu2 == 0.0:
        return VectorField.zeros(coeffs.grid)
    stress = _capillary_difference_stress(coeffs, jac)
    return differentiate(stress, "divergence") * (-coeffs.kappa_over_mu2)


def k_terms(coeffs: Coefficients, jac: JacobianData, diff: DifferenceInputs) -> VectorField:
    a_k, a_0 = jac.a, diff.jac_base.a
    delta_a = a_k - a_0
    delta_u = diff.u_kappa - diff.u_base

    k1 = -matvec(delta_a, diff.grad_p_kappa, transpose=True)

    k2_stress = matmul(delta_a, transformed_sym_gradient(diff.u_kappa, a_k)) - transformed_sym_gradient(
        diff.u_base, delta_a
    )
    k2 = differentiate(multiply(coeffs.mu_rho0, k2_stress), "divergence")

    d_delta = differentiate(delta_u, "sym_double_gradient")
    one = ScalarField.constant(coeffs.grid, 1.0)
    k3_stress = multiply(
        coeffs.mu_rho0, matmul(a_0, transformed_sym_gradient(delta_u, a_k)) - d_delta
    ) + multiply(coeffs.mu_rho0 - one, d_delta)
    k3 = differentiate(k3_stress, "divergence")
    return k1 + k2 + k3


def assemble_forcings(
    scheme: Scheme,
    coeffs: Coefficients,
    jac: JacobianData,
    w: Optional[VectorField] = None,
    grad_q: Optional[VectorField] = None,
    w_dt: Optional[VectorField] = None,
    difference: Optional[DifferenceInputs] = None,
) -> VectorField:
    """Сумма членов правой части для выбранной схемы.

    aux2_F: F¹(∇Q̄) + F²(w̄) + F³; aux3_G: F¹ + F² + G³;
    aux4_H: H¹(w̄) + H²(∇Q̄) + H³(w̄) + H⁴; aux6_outer: H¹ + H² + H³ + (H⁴ − H⁴₀);
    diff_K: K¹ + K² + K³.
    """
    check_same_grid(coeffs.rho0, jac.a)
    if scheme not in SCHEMES:
        raise OutOfRangeError(f"unknown forcing scheme: {scheme}")

    if scheme == "diff_K":
        if difference is None:
            raise OutOfRangeError("scheme diff_K needs difference inputs")
        return k_terms(coeffs, jac, difference)

    if w is None or grad_q is None:
        raise OutOfRangeError(f"scheme {scheme} needs the frozen velocity and pressure gradient")

    if scheme in ("aux2_F", "aux3_G"):
        capillary = f3_term(coeffs, jac) if scheme == "aux2_F" else g3_term(coeffs, jac)
        return f1_term(coeffs, jac, grad_q) + f2_term(coeffs, jac, w) + capillary

    if w_dt is None:
        raise OutOfRangeError(f"scheme {scheme} needs the time derivative of the frozen velocity")
    capillary = h4_term(coeffs, jac) if scheme == "aux4_H" else h4_difference_term(coeffs, jac)
    return h1_term(coeffs, w_dt) + h2_term(jac, grad_q) + h3_term(coeffs, jac, w) + capillary
