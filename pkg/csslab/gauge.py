"""Gauge potentials, the self-dual nonlinearity and the functionals built on it.

The radial `m`-equivariant equation reads `i∂_t u + Δ^{(m)}u = 𝒩(u) = V_u u` with the
real potential

    V_u = −|u|² + 2m A_θ/r² + A_θ²/r² + A_t

and `A_θ[u] = −½∫_0^r |u|² r'dr'`, `A_t[u] = −∫_r^∞ (m + A_θ)|u|² dr'/r'`.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from csslab.radial import (
    ComplexField,
    cumulative_primitive,
    d_r_values,
    integrate_real,
    laplacian_m,
    laplacian_open,
    prefix_logweight,
    tail_logweight,
)

logger = logging.getLogger(__name__)

Variant = Literal["standard", "phase_rotated"]
EnergyForm = Literal["coulomb", "selfdual"]


def _re_dot(u1: ComplexField, u2: ComplexField) -> NDArray[np.float64]:
    return np.real(np.conj(u1.values) * u2.values)


def _log_integral(
    values: NDArray, u: ComplexField, variant: Variant, boundary_tol: float = 1e-4, closure: bool = False
) -> NDArray:
    """`−∫_r^∞ f dr'/r'` (standard) or `+∫_0^r f dr'/r'` (phase rotated)."""
    if variant == "standard":
        return -tail_logweight(values, u.grid, boundary_tol=boundary_tol, closure=closure)
    return prefix_logweight(values, u.grid)


def a_theta(u: ComplexField) -> NDArray[np.float64]:
    return -0.5 * cumulative_primitive(u.abs2(), u.grid)


def a_theta_bilinear(u1: ComplexField, u2: ComplexField) -> NDArray[np.float64]:
    """Polarization `A_θ[u1, u2] = −½∫_0^r Re(ū1 u2) r'dr'`."""
    return -0.5 * cumulative_primitive(_re_dot(u1, u2), u1.grid)


def a_t(u: ComplexField, m: int | None = None, variant: Variant = "standard") -> NDArray[np.float64]:
    """Temporal gauge potential.

    The phase-rotated variant `Å_t = ∫_0^r (m + A_θ)|u|² dr'/r'` differs from the
    standard one by the constant `∫_0^∞ (m + A_θ)|u|² dr/r`.
    """
    m = u.m if m is None else m
    return _log_integral((m + a_theta(u)) * u.abs2(), u, variant)


def potential(u: ComplexField, m: int | None = None, variant: Variant = "standard") -> NDArray[np.float64]:
    """The real potential `V_u` with `𝒩(u) = V_u u`."""
    m = u.m if m is None else m
    r2 = u.r**2
    ath = a_theta(u)
    return -u.abs2() + 2 * m * ath / r2 + ath**2 / r2 + a_t(u, m, variant)


# --------------------------------------------------------------------------
# Multilinear pieces
# --------------------------------------------------------------------------


def n30(u1: ComplexField, u2: ComplexField, u3: ComplexField) -> ComplexField:
    return u3 * -_re_dot(u1, u2)


def n31(u1: ComplexField, u2: ComplexField, u3: ComplexField) -> ComplexField:
    return u3 * (2.0 * a_theta_bilinear(u1, u2) / u3.r**2)


def n32(u1: ComplexField, u2: ComplexField, u3: ComplexField, variant: Variant = "standard") -> ComplexField:
    return u3 * _log_integral(_re_dot(u1, u2), u1, variant)


def n51(u1, u2, u3, u4, u5: ComplexField) -> ComplexField:
    return u5 * (a_theta_bilinear(u1, u2) * a_theta_bilinear(u3, u4) / u5.r**2)


def n52(u1, u2, u3, u4, u5: ComplexField, variant: Variant = "standard") -> ComplexField:
    return u5 * _log_integral(a_theta_bilinear(u1, u2) * _re_dot(u3, u4), u1, variant)


@dataclass
class NonlinearityBreakdown:
    """The cubic and quintic pieces of `𝒩(u)` with `total = n30 + m(n31 + n32) + n51 + n52`.

    Args:
        n30: `−|u|²u`
        n31: `(2/r²)A_θ[u]u`
        n32: `−(∫_r^∞ |u|² dr'/r')u` (or `+∫_0^r` when phase rotated)
        n51: `(A_θ[u]²/r²)u`
        n52: `−(∫_r^∞ A_θ[u]|u|² dr'/r')u` (or `+∫_0^r` when phase rotated)
        total: the assembled nonlinearity
        m: equivariance index used for the assembly
    """

    n30: ComplexField
    n31: ComplexField
    n32: ComplexField
    n51: ComplexField
    n52: ComplexField
    total: ComplexField
    m: int


def nonlinearity(u: ComplexField, m: int | None = None, variant: Variant = "standard") -> NonlinearityBreakdown:
    m = u.m if m is None else m
    p30 = n30(u, u, u)
    p31 = n31(u, u, u)
    p32 = n32(u, u, u, variant)
    p51 = n51(u, u, u, u, u)
    p52 = n52(u, u, u, u, u, variant)
    total = p30 + (p31 + p32) * m + p51 + p52
    return NonlinearityBreakdown(n30=p30, n31=p31, n32=p32, n51=p51, n52=p52, total=total, m=m)


def nonlinearity_total(u: ComplexField, m: int | None = None, variant: Variant = "standard") -> ComplexField:
    return u * potential(u, m, variant)


@dataclass
class MultilinearForms:
    """Quartic and sextic energy forms.

    Args:
        m40: `−¼∫Re(ψ̄1ψ2)Re(ψ̄3ψ4)`
        m41: `∫r^{-2}A_θ[ψ1,ψ2]Re(ψ̄3ψ4)`
        m6: `½∫r^{-2}A_θ[ψ1,ψ2]A_θ[ψ3,ψ4]Re(ψ̄5ψ6)`
    """

    m40: float
    m41: float
    m6: float


def form_m40(u1, u2, u3, u4: ComplexField) -> float:
    return -0.25 * integrate_real(_re_dot(u1, u2) * _re_dot(u3, u4), u1.grid)


def form_m41(u1, u2, u3, u4: ComplexField) -> float:
    return integrate_real(a_theta_bilinear(u1, u2) * _re_dot(u3, u4) / u1.r**2, u1.grid)


def form_m6(u1, u2, u3, u4, u5, u6: ComplexField) -> float:
    integrand = a_theta_bilinear(u1, u2) * a_theta_bilinear(u3, u4) * _re_dot(u5, u6) / u1.r**2
    return 0.5 * integrate_real(integrand, u1.grid)


def multilinear_forms(*psi: ComplexField) -> MultilinearForms:
    """Evaluate `ℳ_{4,0}`, `ℳ_{4,1}` on `ψ1..ψ4` and `ℳ_6` on `ψ1..ψ6`."""
    if len(psi) != 6:
        raise ValueError(f"expected 6 profiles, got {len(psi)}")
    return MultilinearForms(
        m40=form_m40(*psi[:4]),
        m41=form_m41(*psi[:4]),
        m6=form_m6(*psi),
    )


# --------------------------------------------------------------------------
# Energies and the Bogomol'nyi structure
# --------------------------------------------------------------------------


def mass(u: ComplexField) -> float:
    return integrate_real(u.abs2(), u.grid)


def bogomolnyi(u: ComplexField, m: int | None = None) -> ComplexField:
    """`D_u u = ∂_r u − (m + A_θ[u])u/r`."""
    m = u.m if m is None else m
    du = d_r_values(u.values, u.grid)
    return u.with_values(du - (m + a_theta(u)) * u.values / u.r, m=m + 1)


def energy(u: ComplexField, m: int | None = None, form: EnergyForm = "selfdual") -> float:
    m = u.m if m is None else m
    if form == "selfdual":
        return 0.5 * integrate_real(bogomolnyi(u, m).abs2(), u.grid)
    du = d_r_values(u.values, u.grid)
    density = 0.5 * np.abs(du) ** 2 + 0.5 * ((m + a_theta(u)) / u.r) ** 2 * u.abs2() - 0.25 * u.abs2() ** 2
    return integrate_real(density, u.grid)


def l_u(u: ComplexField, w: ComplexField, m: int | None = None) -> ComplexField:
    """Linearized Bogomol'nyi operator `L_u w = D_u w + (u/r)∫_0^r Re(ū w) r'dr'`."""
    m = u.m if m is None else m
    dw = d_r_values(w.values, w.grid)
    b_term = cumulative_primitive(_re_dot(u, w), u.grid)
    return w.with_values(dw - (m + a_theta(u)) * w.values / w.r + u.values * b_term / u.r, m=m + 1)


def l_u_star(u: ComplexField, v: ComplexField, m: int | None = None) -> ComplexField:
    """Adjoint `L_u* v = −∂_r v − v/r − (m + A_θ)v/r + u∫_r^∞ Re(ū v) dr'`."""
    m = u.m if m is None else m
    r = v.r
    dv = d_r_values(v.values, v.grid)
    d_star = -dv - v.values / r - (m + a_theta(u)) * v.values / r
    b_star = u.values * tail_logweight(r * _re_dot(u, v), u.grid, boundary_tol=np.inf)
    return v.with_values(d_star + b_star, m=m)


def grad_energy(u: ComplexField, m: int | None = None, variant: Variant = "standard") -> ComplexField:
    """`∇E[u] = −Δ^{(m)}u + 𝒩(u)`."""
    m = u.m if m is None else m
    return -laplacian_m(u, m) + nonlinearity_total(u, m, variant)


def nonlinearity_derivative(
    u: ComplexField, w: ComplexField, m: int | None = None, variant: Variant = "standard"
) -> ComplexField:
    """Directional derivative `d𝒩(u)[w] = V_u w + (dV_u[w]) u`, assembled without differencing `𝒩`."""
    m = u.m if m is None else m
    r2 = u.r**2
    ath = a_theta(u)
    d_ath = 2.0 * a_theta_bilinear(u, w)
    re_uw = _re_dot(u, w)
    tail = _log_integral(d_ath * u.abs2() + 2.0 * (m + ath) * re_uw, u, variant, np.inf, closure=True)
    d_pot = -2.0 * re_uw + 2 * m * d_ath / r2 + 2.0 * ath * d_ath / r2 + tail
    return w.with_values(potential(u, m, variant) * w.values + d_pot * u.values)


def nonlinearity_increment(
    u: ComplexField, z: ComplexField, m: int | None = None, variant: Variant = "standard"
) -> ComplexField:
    """`𝒩(u + z) − 𝒩(u)` expanded in powers of `z`.

    With `δρ = 2Re(ūz) + |z|²` and `δA_θ = 2A_θ[u, z] + A_θ[z]`, the increment is
    `V_u z + δV (u + z)` where

        δV = −δρ + 2m δA_θ/r² + (2A_θ[u] + δA_θ) δA_θ/r² + δA_t,
        δA_t = −∫_r^∞ (δA_θ|u|² + (m + A_θ[u] + δA_θ) δρ) dr'/r'.

    Every term carries at least one factor of `z`, so the result keeps its relative accuracy
    however small `z` is against `u`.
    """
    m = u.m if m is None else m
    r2 = u.r**2
    ath = a_theta(u)
    d_ath = 2.0 * a_theta_bilinear(u, z) + a_theta(z)
    d_rho = 2.0 * _re_dot(u, z) + z.abs2()
    tail = _log_integral(d_ath * u.abs2() + (m + ath + d_ath) * d_rho, u, variant, np.inf, closure=True)
    d_pot = -d_rho + 2 * m * d_ath / r2 + (2.0 * ath + d_ath) * d_ath / r2 + tail
    return z.with_values(potential(u, m, variant) * z.values + d_pot * (u.values + z.values))


def hessian_energy(u: ComplexField, w: ComplexField, m: int | None = None) -> ComplexField:
    """`∇²E[u]w = −Δ^{(m)}w + d𝒩(u)[w]`, equal to `L_u* L_u w` wherever `D_u u = 0`.

    Uses the open outer closure so that profiles growing like `r²Q` are not clipped at `r_max`.
    """
    m = u.m if m is None else m
    return -laplacian_open(w, m) + nonlinearity_derivative(u, w, m)


def grad_energy_selfdual(u: ComplexField, m: int | None = None) -> ComplexField:
    """`∇E[u] = L_u* D_u u`, the self-dual assembly route."""
    m = u.m if m is None else m
    return l_u_star(u, bogomolnyi(u, m), m)


def virial_rates(u: ComplexField, m: int | None = None) -> tuple[float, float]:
    """Right-hand sides of the virial identities.

    `∂_t∫r²|u|² = 4∫Im(ū r∂_r u)` and `∂_t∫Im(ū r∂_r u) = 4E[u]`.
    """
    du = d_r_values(u.values, u.grid)
    first = 4.0 * integrate_real(np.imag(np.conj(u.values) * u.r * du), u.grid)
    return first, 4.0 * energy(u, m)


def second_moment(u: ComplexField) -> float:
    return integrate_real(u.r**2 * u.abs2(), u.grid)


def theta_z(z: ComplexField, frak_m: int | None = None) -> float:
    """`θ_z = −∫_0^∞ (𝔪 + A_θ[z])|z|² dr/r`, the phase speed of the rotated frame."""
    frak_m = z.m if frak_m is None else frak_m
    integrand = (frak_m + a_theta(z)) * z.abs2()
    return -float(np.sum(z.grid.weights * integrand / z.r))


def nonlinearity_rotated(z: ComplexField, frak_m: int | None = None) -> ComplexField:
    """`𝒩̊(z) = 𝒩(z) − θ_z z`."""
    return nonlinearity_total(z, frak_m, "phase_rotated")


def grad_energy_rotated(z: ComplexField, frak_m: int | None = None) -> ComplexField:
    """`∇Ẽ[z] = −Δ^{(𝔪)}z + 𝒩̊(z)`, the gradient of the `𝔪`-equivariant energy in the rotated frame."""
    frak_m = z.m if frak_m is None else frak_m
    return -laplacian_m(z, frak_m) + nonlinearity_rotated(z, frak_m)
