"""The approximate radiation `z(t, r)` launched by the asymptotic profile `z* = q r^ν χ(r)`.

Everything is constructed for `t > 0`; negative times use the time-reversal symmetry
`z[q, ν](t) = conj(z[q̄, ν̄](|t|))` of the `𝔪 = −2` phase-rotated equation.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import trapezoid
from scipy.special import jv

from csslab.gauge import bogomolnyi, nonlinearity_rotated, theta_z
from csslab.radial import (
    ComplexField,
    Cutoff,
    RadialGrid,
    d_r_values,
    envelope_minus1,
    laplacian_m,
    l2_norm,
    norms,
    resample_values,
)
from csslab.specfun import Connection, connection, cpow, eval_e1, eval_f1, eval_f2, series_coeffs

logger = logging.getLogger(__name__)

Y_MATCH = 10.0


@dataclass(frozen=True)
class RadiationSpec:
    """Asymptotic profile `z* = q r^ν χ(r)` of the radiation.

    Args:
        q: Complex amplitude (zero gives the trivial radiation)
        nu: Complex exponent with `Re ν > 0`
        frak_m: Equivariance index of the radiation
        cutoff_scale: Scale `A` of the cutoff `χ_A`
        order: Number of terms kept in the asymptotic series
    """

    q: complex = 1.0
    nu: complex = 2.0
    frak_m: int = -2
    cutoff_scale: float = 1.0
    order: int = 12

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "nu", complex(self.nu))
        if self.nu.real <= 0:
            raise ValueError(f"Re ν must be positive, got {self.nu.real:g}")

    @property
    def n_profiles(self) -> int:
        """`N = ⌊(Re ν + 1)/2⌋`."""
        return int(np.floor((self.nu.real + 1.0) / 2.0))

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(self.cutoff_scale)

    def reversed(self) -> "RadiationSpec":
        return replace(self, q=self.q.conjugate(), nu=self.nu.conjugate())

    def z_star(self, grid: RadialGrid) -> ComplexField:
        r = grid.radii
        return ComplexField(grid, self.q * cpow(r, self.nu) * self.cutoff(r), self.frak_m)

    @cached_property
    def connection(self) -> Connection:
        return connection(self.nu, self.frak_m, order=self.order)

    @property
    def p(self) -> complex:
        return self.connection.p

    @property
    def leading_coefficient(self) -> complex:
        """`κ = (4i)^{(ν−|𝔪|)/2} p`, so that `ẑ_lin ≈ q κ t^{(ν−2)/2} r²` near the origin."""
        return self.connection.kappa_expected


@dataclass
class RadiationField:
    """Samples of the radiation at one time.

    Args:
        t: Time (nonzero)
        z: `z(t, ·)` with index `𝔪`
        z1: `D_z^{(𝔪)} z`
        gamma_z: Extra phase `γ_z(t) = −∫_0^t θ_z dt'`
    """

    t: float
    z: ComplexField
    z1: ComplexField
    gamma_z: float


@dataclass
class ResidualReport:
    """Size of the radiation residual `Ψ_z = i∂_t z + Δ^{(𝔪)}z − 𝒩̊(z)`.

    Args:
        t: Time
        psi: The residual field
        psi_z_l2: `‖Ψ_z‖_{L²}`
        psi_z_h1: `‖|Ψ_z|_{−1}‖_{L²}`
        psi_z_weighted: `‖r^{−δ_z}|Ψ_z|_{−1}‖_{L²}`
        delta_z: Weight exponent `δ_z`
        dt_mismatch: Relative L² gap between the analytic and finite-difference `∂_t z`
    """

    t: float
    psi: ComplexField
    psi_z_l2: float
    psi_z_h1: float
    psi_z_weighted: float
    delta_z: float
    dt_mismatch: float


@dataclass(frozen=True)
class ExpansionProfiles:
    """Exterior expansion `z ≈ Σ tⁿ h_n` of the radiation.

    Args:
        g: Nonlinear corrections `g_0 = 0, g_1, ..., g_N`
        h: `h_n = q c_n r^{ν−2n} χ + g_n` for `n < N`
        p_lin: Linear errors `P_{lin,n} = q c_n [Δ^{(𝔪)}, χ] r^{ν−2n}` for `n < N`
        lap_g: `Δ^{(𝔪)} g_n` for every `g_n`
    """

    g: list[ComplexField]
    h: list[ComplexField]
    p_lin: list[ComplexField]
    lap_g: list[ComplexField]


def _commutator(cut: Cutoff, r: NDArray, f: NDArray, df: NDArray) -> NDArray:
    """`[Δ, χ]f = χ''f + χ'(2∂_r f + f/r)`."""
    return cut.d2(r) * f + cut.d1(r) * (2.0 * df + f / r)


# --------------------------------------------------------------------------
# Linear radiation
# --------------------------------------------------------------------------


def _profile_f(spec: RadiationSpec, y: NDArray) -> tuple[NDArray, NDArray]:
    """`F(Y)` and `F'(Y)`: `κ e₁` inside `Y_MATCH`, `f₁ + α f₂` outside."""
    conn = spec.connection
    f = np.empty(y.shape, dtype=np.complex128)
    df = np.empty(y.shape, dtype=np.complex128)
    inner = y <= Y_MATCH
    if np.any(inner):
        e1, de1 = eval_e1(y[inner], spec.nu, spec.frak_m)
        f[inner] = conn.kappa_expected * e1
        df[inner] = conn.kappa_expected * de1
    outer = ~inner
    if np.any(outer):
        f1, df1 = eval_f1(y[outer], spec.nu, spec.frak_m, spec.order)
        f2, df2 = eval_f2(y[outer], spec.nu, spec.frak_m, spec.order)
        f[outer] = f1 + conn.alpha * f2
        df[outer] = df1 + conn.alpha * df2
    return f, df


@dataclass
class _LinearParts:
    z: NDArray
    dz_dt: NDArray
    residual: NDArray


def _linear_forward(spec: RadiationSpec, s: float, grid: RadialGrid) -> _LinearParts:
    r = grid.radii
    n = np.zeros(grid.n, dtype=np.complex128)
    if spec.q == 0:
        return _LinearParts(n, n.copy(), n.copy())
    cut = spec.cutoff
    support = r <= 2.0 * cut.scale
    y = r[support] / np.sqrt(s)
    f, df = _profile_f(spec, y)
    amp = spec.q * cpow(s, spec.nu / 2)
    chi = cut(r[support])

    z = n.copy()
    z[support] = amp * f * chi
    dz_dt = n.copy()
    dz_dt[support] = amp / s * chi * (0.5 * spec.nu * f - 0.5 * y * df)
    residual = n.copy()
    residual[support] = amp * _commutator(cut, r[support], f, df / np.sqrt(s))
    return _LinearParts(z, dz_dt, residual)


def z_lin_hat(spec: RadiationSpec, t: float, grid: RadialGrid) -> ComplexField:
    """`ẑ_lin = q t^{ν/2} F(t^{−1/2} r) χ(r)`, conjugated construction for `t < 0`."""
    if t == 0:
        raise ValueError("the radiation is built for t ≠ 0")
    if t > 0:
        return ComplexField(grid, _linear_forward(spec, t, grid).z, spec.frak_m)
    return ComplexField(grid, np.conj(_linear_forward(spec.reversed(), -t, grid).z), spec.frak_m)


# --------------------------------------------------------------------------
# Exterior expansion
# --------------------------------------------------------------------------


def _rotated_coefficient(h: list[ComplexField], n: int, frak_m: int) -> ComplexField:
    """tⁿ-coefficient of `𝒩̊(Σ_{k ≤ n} t^k h_k)`.

    `𝒩̊` is a real polynomial map of degree 5, so `s ↦ 𝒩̊(Σ s^k h_k)` is a polynomial
    of degree `5n` and is recovered exactly from `5n + 1` Chebyshev samples.
    """
    if n == 0:
        return nonlinearity_rotated(h[0], frak_m)
    degree = 5 * n
    nodes = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
    samples = []
    for s in nodes:
        trial = h[0]
        for k in range(1, n + 1):
            trial = trial + h[k] * s**k
        samples.append(nonlinearity_rotated(trial, frak_m).values)
    vander = np.vander(nodes, degree + 1, increasing=True)
    coeffs = np.linalg.solve(vander, np.array(samples))
    return h[0].with_values(coeffs[n])


@lru_cache(maxsize=32)
def expansion_profiles(spec: RadiationSpec, grid: RadialGrid) -> ExpansionProfiles:
    """`g_{n+1} = (i/(n+1))(Δ^{(𝔪)} g_n + P_{lin,n} − [𝒩̊]_n)` for `n < N`, with `g_0 = 0`."""
    r = grid.radii
    cut = spec.cutoff
    coeffs = series_coeffs("f1", spec.nu, spec.frak_m, max(spec.order, spec.n_profiles + 1)).coeffs
    zero = ComplexField.zeros(grid, spec.frak_m)
    g, h, p_lin, lap_g = [zero], [], [], [zero]
    for n in range(spec.n_profiles):
        power = spec.q * coeffs[n] * cpow(r, spec.nu - 2 * n)
        dpower = (spec.nu - 2 * n) * power / r
        p_lin.append(zero.with_values(_commutator(cut, r, power, dpower)))
        h.append(zero.with_values(power * cut(r)) + g[n])
        rhs = lap_g[n] + p_lin[n] - _rotated_coefficient(h, n, spec.frak_m)
        g.append(rhs * (1j / (n + 1)))
        lap_g.append(laplacian_m(g[-1], spec.frak_m))
    logger.debug(f"Built {spec.n_profiles} expansion profile(s) for ν={spec.nu}")
    return ExpansionProfiles(g=g, h=h, p_lin=p_lin, lap_g=lap_g)


# --------------------------------------------------------------------------
# Full radiation
# --------------------------------------------------------------------------


@dataclass
class _ForwardParts:
    z: NDArray
    dz_dt: NDArray
    lin_residual: NDArray
    # (i∂_t + Δ) applied to the exterior correction
    ext_residual: NDArray


def _forward(spec: RadiationSpec, s: float, grid: RadialGrid) -> _ForwardParts:
    lin = _linear_forward(spec, s, grid)
    z = lin.z.copy()
    dz_dt = lin.dz_dt.copy()
    ext = np.zeros_like(z)
    if spec.n_profiles == 0 or spec.q == 0:
        return _ForwardParts(z, dz_dt, lin.residual, ext)

    prof = expansion_profiles(spec, grid)
    r = grid.radii
    root = np.sqrt(s)
    inner = Cutoff(root)
    outer = 1.0 - inner(r)
    big_g = sum(s**n * prof.g[n].values for n in range(1, len(prof.g)))
    dg_dt = sum(n * s ** (n - 1) * prof.g[n].values for n in range(1, len(prof.g)))
    lap_big_g = sum(s**n * prof.lap_g[n].values for n in range(1, len(prof.lap_g)))
    d_big_g = d_r_values(big_g, grid)
    # ∂_t χ(r/√t) = −χ'(x) x / (2t)
    x = r / root
    dchi_dt = -inner.d1(r) * root * x / (2.0 * s)

    z += outer * big_g
    dz_dt += outer * dg_dt - dchi_dt * big_g
    ext = 1j * (outer * dg_dt - dchi_dt * big_g) + outer * lap_big_g - _commutator(inner, r, big_g, d_big_g)
    return _ForwardParts(z, dz_dt, lin.residual, ext)


def _oriented(spec: RadiationSpec, t: float, grid: RadialGrid) -> _ForwardParts:
    if t == 0:
        raise ValueError("the radiation is built for t ≠ 0")
    if t > 0:
        return _forward(spec, t, grid)
    parts = _forward(spec.reversed(), -t, grid)
    return _ForwardParts(
        z=np.conj(parts.z),
        dz_dt=-np.conj(parts.dz_dt),
        lin_residual=np.conj(parts.lin_residual),
        ext_residual=np.conj(parts.ext_residual),
    )


def z_values(spec: RadiationSpec, t: float, grid: RadialGrid) -> ComplexField:
    """`z = ẑ_lin + (1 − χ_{|t|^{1/2}}) Σ tⁿ g_n` without the phase bookkeeping."""
    return ComplexField(grid, _oriented(spec, t, grid).z, spec.frak_m)


def dt_z(spec: RadiationSpec, t: float, grid: RadialGrid) -> ComplexField:
    """Analytic `∂_t z`."""
    return ComplexField(grid, _oriented(spec, t, grid).dz_dt, spec.frak_m)


def dt_z_fd(spec: RadiationSpec, t: float, grid: RadialGrid, rel_step: float = 1e-2) -> ComplexField:
    """Fourth-order central difference of `z` in time, step `rel_step·|t|`."""
    h = rel_step * abs(t)
    at = [z_values(spec, t + k * h, grid).values for k in (-2, -1, 1, 2)]
    values = (at[0] - 8.0 * at[1] + 8.0 * at[2] - at[3]) / (12.0 * h)
    return ComplexField(grid, values, spec.frak_m)


def theta_z_at(spec: RadiationSpec, t: float, grid: RadialGrid) -> float:
    return theta_z(z_values(spec, t, grid), spec.frak_m)


def gamma_z(
    spec: RadiationSpec,
    t: float,
    grid: RadialGrid,
    per_decade: int = 8,
    decades: int = 6,
) -> float:
    """`γ_z(t) = −∫_0^t θ_z dt'` by trapezoid on a geometric time ladder.

    The ladder runs from `|t|` down to `|t|·10^{−decades}`; below it `θ_z` is taken
    constant, its limit at `t = 0` being finite.
    """
    if spec.q == 0:
        return 0.0
    abs_t = abs(t)
    sign = np.sign(t)
    log_s = np.linspace(np.log(abs_t) - decades * np.log(10.0), np.log(abs_t), decades * per_decade + 1)
    times = np.exp(log_s)
    thetas = np.array([theta_z_at(spec, sign * s, grid) for s in times])
    integral = trapezoid(thetas * times, log_s) + thetas[0] * times[0]
    return float(-sign * integral)


def z_full(spec: RadiationSpec, t: float, grid: RadialGrid, with_phase: bool = True) -> RadiationField:
    z = z_values(spec, t, grid)
    phase = gamma_z(spec, t, grid) if with_phase else 0.0
    return RadiationField(t=t, z=z, z1=bogomolnyi(z, spec.frak_m), gamma_z=phase)


def psi_z(spec: RadiationSpec, t: float, grid: RadialGrid, delta_z: float = 0.01) -> ResidualReport:
    """Residual of the radiation with analytic time derivatives.

    The finite-difference cross-check is logged when it disagrees by more than `1e-5`.
    """
    parts = _oriented(spec, t, grid)
    z = ComplexField(grid, parts.z, spec.frak_m)
    psi = z.with_values(parts.lin_residual + parts.ext_residual) - nonlinearity_rotated(z, spec.frak_m)

    scale = l2_norm(z.with_values(parts.dz_dt))
    mismatch = 0.0
    if scale > 0:
        mismatch = l2_norm(dt_z_fd(spec, t, grid) - z.with_values(parts.dz_dt)) / scale
        if mismatch > 1e-5:
            logger.warning(f"Analytic and finite-difference ∂_t z disagree by {mismatch:.2e} at t={t:g}")

    env = envelope_minus1(psi)
    r = grid.radii
    return ResidualReport(
        t=t,
        psi=psi,
        psi_z_l2=l2_norm(psi),
        psi_z_h1=l2_norm(psi.with_values(env)),
        psi_z_weighted=l2_norm(psi.with_values(env * r**-delta_z)),
        delta_z=delta_z,
        dt_mismatch=mismatch,
    )


def data_distance(spec: RadiationSpec, t: float, grid: RadialGrid) -> float:
    """`‖z(t) − z*‖_{H^{1,1}}`."""
    return norms(z_values(spec, t, grid) - spec.z_star(grid), spec.frak_m).h11


# --------------------------------------------------------------------------
# Transforms
# --------------------------------------------------------------------------


def hankel_j2(values: NDArray, radii: NDArray, weights: NDArray, targets: NDArray) -> NDArray[np.complex128]:
    """`ρ ↦ −(i/2)∫ J₂(ρr/2) f(r) r dr` by quadrature on the given nodes."""
    kernel = jv(2, 0.5 * np.outer(targets, radii))
    return -0.5j * kernel @ (weights * values * radii)


def u_star(spec: RadiationSpec, grid: RadialGrid, n_quad: int = 4096) -> ComplexField:
    """`u*(ρ) = −(i/2)∫_0^∞ J₂(ρr/2) z*(r) r dr` on `grid`, trapezoid over the support of `z*`."""
    support = 2.0 * spec.cutoff_scale
    nodes = np.linspace(0.0, support, n_quad + 1)
    weights = np.full(nodes.size, nodes[1])
    weights[[0, -1]] *= 0.5
    z_star = spec.q * cpow(np.maximum(nodes, 1e-300), spec.nu) * spec.cutoff(nodes)
    return ComplexField(grid, hankel_j2(z_star, nodes, weights, grid.radii), spec.frak_m)


def pseudoconformal(u: ComplexField, t: float) -> tuple[ComplexField, float]:
    """`[𝒞u](t', r) = (1/t') e^{ir²/(4t')} sign(t')^m u(t, r/|t'|)` with `t' = −1/t`."""
    if t == 0:
        raise ValueError("pseudoconformal transform is singular at t = 0")
    t_new = -1.0 / t
    r = u.r
    sign = np.sign(t_new) ** u.m
    values = sign * np.exp(0.25j * r**2 / t_new) * resample_values(u, r / abs(t_new)) / t_new
    return u.with_values(values), t_new
