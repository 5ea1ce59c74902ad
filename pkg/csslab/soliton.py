"""The Jackiw–Pi vortex, its generalized kernel and the linearized operators around it."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from csslab.gauge import hessian_energy, l_u, l_u_star
from csslab.radial import (
    ComplexField,
    Cutoff,
    RadialGrid,
    l2_norm,
    norms,
    real_inner,
    scaling_gen,
)

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi

# signed limits of the truncated diagonal over 4π log R
DIAGONAL_LIMITS = (1.0, -1.0)


class DivergenceError(Exception):
    """Raised when the null-mode marching leaves its growth envelope.

    Args:
        message: Error message
        radius: Radius at which the envelope was exceeded
    """

    def __init__(self, message: str, radius: float):
        super().__init__(message)
        self.radius = radius


class TransversalityError(Exception):
    """Raised when the orthogonality profiles are not transversal to the modulation directions."""


def vortex_values(r: NDArray, m: int = 0) -> NDArray[np.float64]:
    """`Q(r) = √8(m+1) r^m / (1 + r^{2m+2})`."""
    return np.sqrt(8.0) * (m + 1) * r**m / (1.0 + r ** (2 * m + 2))


def vortex_scaling_values(r: NDArray, m: int = 0) -> NDArray[np.float64]:
    """`ΛQ = (m+1)(1 − r^{2m+2})/(1 + r^{2m+2}) Q`."""
    p = r ** (2 * m + 2)
    return (m + 1) * (1.0 - p) / (1.0 + p) * vortex_values(r, m)


@dataclass(frozen=True)
class SolitonProfile:
    """A modulated vortex `Q_{λ,γ} = λ^{-1} e^{iγ} Q(r/λ)`.

    Args:
        m: Equivariance index, `m ≥ 0`
        field: Samples of `Q_{λ,γ}`
        lam: Scale `λ`
        gamma: Phase `γ`
    """

    m: int
    field: ComplexField
    lam: float = 1.0
    gamma: float = 0.0

    @property
    def grid(self) -> RadialGrid:
        return self.field.grid


def vortex(m: int, grid: RadialGrid) -> SolitonProfile:
    if m < 0:
        raise ValueError("no vortex for negative equivariance index")
    return SolitonProfile(m=m, field=ComplexField(grid, vortex_values(grid.radii, m), m))


def rescale(profile: SolitonProfile, lam: float, gamma: float = 0.0) -> SolitonProfile:
    """Re-evaluate the closed form at scale `λ·profile.lam` and phase `γ + profile.gamma`."""
    lam_new = profile.lam * lam
    gamma_new = profile.gamma + gamma
    r = profile.grid.radii
    values = np.exp(1j * gamma_new) * vortex_values(r / lam_new, profile.m) / lam_new
    return SolitonProfile(profile.m, ComplexField(profile.grid, values, profile.m), lam_new, gamma_new)


# --------------------------------------------------------------------------
# Generalized null mode
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NullModeRho:
    """Real generalized null mode `ρ` with `L_Q ρ = rQ/(2(m+1))` and `ℒ_Q ρ = Q`.

    Args:
        field: Samples of `ρ`
        m: Equivariance index
        tail_constant: Fitted `C` in `|ρ − r²Q/(4(m+1))| ≤ C Q (log r)²` over `r ≥ 2`
    """

    field: ComplexField
    m: int
    tail_constant: float


def solve_rho(m: int, grid: RadialGrid) -> NullModeRho:
    """March `ρ̃' = r/(2(m+1)) − I/r`, `I' = Q²ρ̃ r` outward and return `ρ = Qρ̃`.

    `I(r) = ∫_0^r Q²ρ̃ r'dr'` is the memory term. The implicit trapezoid step is
    solved in closed form for the 2×2 system.

    Raises:
        DivergenceError: If `|ρ̃|` exceeds `10 r²`
    """
    r = grid.radii
    q2 = vortex_values(r, m) ** 2
    k = 1.0 / (2.0 * (m + 1))

    rho_t = np.empty_like(r)
    mem = np.empty_like(r)
    rho_t[0] = r[0] ** 2 * k / 2.0
    mem[0] = q2[0] * rho_t[0] * r[0] ** 2 / (2 * m + 4)

    for j in range(grid.n - 1):
        dr = r[j + 1] - r[j]
        a = 0.5 * dr
        # y_{j+1} - a·A_{j+1} y_{j+1} = y_j + a·(A_j y_j + b_j + b_{j+1})
        rhs0 = rho_t[j] + a * (-mem[j] / r[j] + k * (r[j] + r[j + 1]))
        rhs1 = mem[j] + a * q2[j] * rho_t[j] * r[j]
        c01 = a / r[j + 1]
        c10 = -a * q2[j + 1] * r[j + 1]
        det = 1.0 - c01 * c10
        rho_t[j + 1] = (rhs0 - c01 * rhs1) / det
        mem[j + 1] = rhs1 - c10 * rho_t[j + 1]
        if abs(rho_t[j + 1]) > 10.0 * r[j + 1] ** 2:
            raise DivergenceError(f"null mode left its envelope at r={r[j + 1]:.4g}", float(r[j + 1]))

    q = vortex_values(r, m)
    rho = q * rho_t
    leading = r**2 * q * k / 2.0
    far = r >= 2.0
    tail_constant = 0.0
    if np.any(far):
        tail_constant = float(np.max(np.abs(rho - leading)[far] / (q[far] * np.log(r[far]) ** 2)))
    return NullModeRho(field=ComplexField(grid, rho, m), m=m, tail_constant=tail_constant)


# --------------------------------------------------------------------------
# Linearized operators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearizedOperators:
    """`L_Q`, its adjoint and `ℒ_Q = L_Q* L_Q` around a vortex.

    Args:
        soliton: The vortex `Q`
    """

    soliton: SolitonProfile

    @property
    def q(self) -> ComplexField:
        return self.soliton.field

    def l_q(self, w: ComplexField) -> ComplexField:
        return l_u(self.q, w, self.soliton.m)

    def l_q_star(self, v: ComplexField) -> ComplexField:
        return l_u_star(self.q, v, self.soliton.m)

    def cal_l_q(self, w: ComplexField) -> ComplexField:
        """`ℒ_Q w` assembled as the energy Hessian at `Q` with the second-order radial stencil."""
        return hessian_energy(self.q, w, self.soliton.m)

    def cal_l_q_factored(self, w: ComplexField) -> ComplexField:
        """`L_Q*(L_Q w)`, the self-dual factorization of `ℒ_Q`."""
        return self.l_q_star(self.l_q(w))


def lin_ops(soliton: SolitonProfile) -> LinearizedOperators:
    return LinearizedOperators(soliton)


@dataclass
class KernelReport:
    """Relative L² residuals of the generalized kernel relations.

    Args:
        l_lambda_q: `L_Q ΛQ = 0`
        l_iq: `L_Q iQ = 0`
        l_ir2q: `L_Q(i r²Q/4) = i rQ/2`
        l_rho: `L_Q ρ = rQ/(2(m+1))`
        cal_l_lambda_q: `ℒ_Q ΛQ = 0`
        cal_l_iq: `ℒ_Q iQ = 0`
        cal_l_rho: `ℒ_Q ρ = Q`
        cal_l_ir2q: `ℒ_Q(i r²Q/4) = −iΛQ`
    """

    l_lambda_q: float
    l_iq: float
    l_ir2q: float
    l_rho: float
    cal_l_lambda_q: float
    cal_l_iq: float
    cal_l_rho: float
    cal_l_ir2q: float

    def worst(self) -> float:
        return max(vars(self).values())


def _relative(residual: ComplexField, scale: float) -> float:
    return l2_norm(residual) / scale if scale > 0 else l2_norm(residual)


def kernel_report(soliton: SolitonProfile, rho: NullModeRho) -> KernelReport:
    ops = lin_ops(soliton)
    m = soliton.m
    q = soliton.field
    r = q.r
    lam_q = q.with_values(vortex_scaling_values(r, m))
    iq = q * 1j
    ir2q = q * (1j * r**2 / 4.0)
    irq = q * (1j * r / 2.0)
    rq_rho = q.with_values(r * q.values / (2.0 * (m + 1)), m=m + 1)
    d_scale = norms(lam_q).h1_dot

    l_ir2q = ops.l_q(ir2q)
    l_rho = ops.l_q(rho.field)
    return KernelReport(
        l_lambda_q=_relative(ops.l_q(lam_q), d_scale),
        l_iq=_relative(ops.l_q(iq), d_scale),
        l_ir2q=_relative(l_ir2q - irq, l2_norm(irq)),
        l_rho=_relative(l_rho - rq_rho, l2_norm(rq_rho)),
        cal_l_lambda_q=_relative(ops.cal_l_q(lam_q), l2_norm(q)),
        cal_l_iq=_relative(ops.cal_l_q(iq), l2_norm(q)),
        cal_l_rho=_relative(ops.cal_l_q(rho.field) - q, l2_norm(q)),
        cal_l_ir2q=_relative(ops.cal_l_q(ir2q) + lam_q * 1j, l2_norm(lam_q)),
    )


# --------------------------------------------------------------------------
# Orthogonality profiles
# --------------------------------------------------------------------------


def c2_bump(r: NDArray, lo: float, hi: float) -> NDArray[np.float64]:
    """`(1 − x²)³` on `[lo, hi]` with `x` the affine coordinate onto `[−1, 1]`."""
    x = (r - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    return np.where(np.abs(x) < 1.0, (1.0 - x**2) ** 3, 0.0)


@dataclass(frozen=True)
class OrthoProfiles:
    """Compactly supported profiles `𝒵₁` (real) and `𝒵₂` (imaginary) fixing the decomposition.

    Both satisfy the gauge conditions `(−i y²Q/4, 𝒵_k)_r = (ρ, 𝒵_k)_r = 0` and are
    normalized so that `(ΛQ, 𝒵₁)_r = (iQ, 𝒵₂)_r = 1`.

    Args:
        z1: The real profile `𝒵₁`
        z2: The imaginary profile `𝒵₂`
        transversality_det: Determinant of the transversality matrix before normalization
    """

    z1: ComplexField
    z2: ComplexField
    transversality_det: float

    @property
    def grid(self) -> RadialGrid:
        return self.z1.grid

    def pairings(self, f: ComplexField) -> NDArray[np.float64]:
        return np.array([real_inner(f, self.z1), real_inner(f, self.z2)])


def build_ortho_profiles(
    grid: RadialGrid,
    rho: NullModeRho | None = None,
    support_a: tuple[float, float] = (0.5, 2.0),
    support_b: tuple[float, float] = (1.0, 4.0),
    min_det: float = 1e-3,
) -> OrthoProfiles:
    """Build `𝒵₁`, `𝒵₂` from two C² bumps by projection against `ρ` and `y²Q`.

    The default bumps sit on `[1/2, 2]` and `[1, 4]`, so both profiles are supported in `[1/2, 4]`.

    Raises:
        TransversalityError: If the transversality determinant before normalization is below `min_det`
    """
    rho = solve_rho(0, grid) if rho is None else rho
    q = vortex(0, grid).field
    r = grid.radii
    bump_a = ComplexField(grid, c2_bump(r, *support_a))
    bump_b = ComplexField(grid, c2_bump(r, *support_b))
    y2q = q * r**2

    kappa1 = real_inner(rho.field, bump_a) / real_inner(rho.field, bump_b)
    z1 = bump_a - bump_b * kappa1
    kappa2 = real_inner(y2q, bump_a) / real_inner(y2q, bump_b)
    z2 = (bump_a - bump_b * kappa2) * 1j

    d1 = real_inner(scaling_gen(q), z1)
    d2 = real_inner(q * 1j, z2)
    det = d1 * d2
    if abs(det) < min_det:
        raise TransversalityError(f"transversality determinant {det:.3e} below {min_det:g}")
    logger.debug(f"Orthogonality profiles built with transversality determinant {det:.4g}")
    return OrthoProfiles(z1=z1 * (1.0 / d1), z2=z2 * (1.0 / d2), transversality_det=det)


# --------------------------------------------------------------------------
# Truncated relations and coercivity
# --------------------------------------------------------------------------


@dataclass
class TruncatedRelations:
    """Logarithmically divergent pairings at a truncation radius `R`.

    Args:
        radius: The radius `R`
        log_excess: `(½rQ, χ_R ½rQ)_r − 4π log R`
        matrix: `[[(ΛQ, −r²Qχ_R/4), (iQ, −r²Qχ_R/4)], [(ΛQ, −iρχ_R), (iQ, −iρχ_R)]]`
        diagonal_ratios: Diagonal entries divided by `4π log R`, tending to `DIAGONAL_LIMITS`
    """

    radius: float
    log_excess: float
    matrix: list[list[float]]
    diagonal_ratios: list[float]


def truncated_relations_report(radius: float, soliton: SolitonProfile, rho: NullModeRho) -> TruncatedRelations:
    q = soliton.field
    r = q.r
    chi = Cutoff(radius)(r)
    half_rq = q * (0.5 * r)
    lam_q = scaling_gen(q)
    iq = q * 1j
    dir_b = q * (-(r**2) * chi / 4.0)
    dir_eta = rho.field * (-1j * chi)
    matrix = [
        [real_inner(lam_q, dir_b), real_inner(iq, dir_b)],
        [real_inner(lam_q, dir_eta), real_inner(iq, dir_eta)],
    ]
    log_r = FOUR_PI * np.log(radius)
    return TruncatedRelations(
        radius=radius,
        log_excess=real_inner(half_rq, half_rq * chi) - log_r,
        matrix=matrix,
        diagonal_ratios=[matrix[0][0] / log_r, matrix[1][1] / log_r],
    )


def project_out(eps: ComplexField, ortho: OrthoProfiles) -> ComplexField:
    """Orthogonal projection of `ε` onto `{𝒵₁, 𝒵₂}^⊥` in the real inner product."""
    basis = [ortho.z1, ortho.z2]
    gram = np.array([[real_inner(a, b) for b in basis] for a in basis])
    coeffs = np.linalg.solve(gram, np.array([real_inner(a, eps) for a in basis]))
    return eps - ortho.z1 * coeffs[0] - ortho.z2 * coeffs[1]


def coercivity_ratio(eps: ComplexField, ortho: OrthoProfiles, soliton: SolitonProfile | None = None) -> float | None:
    """`‖L_Q ε⊥‖_{L²} / ‖ε⊥‖_{𝓗̇¹₀}`, or `None` for `ε⊥ = 0`."""
    soliton = vortex(0, eps.grid) if soliton is None else soliton
    eps_perp = project_out(eps, ortho)
    denom = norms(eps_perp, 0).h1_dot_log
    if denom == 0.0:
        return None
    return l2_norm(lin_ops(soliton).l_q(eps_perp)) / denom
