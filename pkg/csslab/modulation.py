"""Blow-up rates, the formal modulation system and the decomposition `u = e^{iγ_z}[(Q + ε)_{λ,γ} + z]`."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from csslab.gauge import energy, grad_energy_selfdual, nonlinearity_increment, nonlinearity_total, theta_z
from csslab.radial import (
    ComplexField,
    Cutoff,
    RadialGrid,
    l2_norm,
    norms,
    real_inner,
    resample_values,
    rescale,
    scaling_gen,
    scaling_gen_trunc,
)
from csslab.radiation import RadiationField, RadiationSpec, z_full, z_values
from csslab.soliton import NullModeRho, OrthoProfiles, lin_ops, vortex, vortex_scaling_values
from csslab.specfun import connection_p, cpow, gamma_complex

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
EIGHT_SQRT8_PI = 8.0 * np.sqrt(8.0) * np.pi


class RegimeError(Exception):
    """Raised when a quantity is requested outside its asymptotic regime (t ≥ 0, q = 0, B₀ too small)."""


class ModulationODEError(Exception):
    """Raised when the modulation system leaves `log B₀ > 1`.

    Args:
        message: Error message
        t: Time at which integration stopped
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class DecompositionError(Exception):
    """Base class for decomposition failures.

    Args:
        message: Error message
        iterations: Newton iterations performed
    """

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class TubeError(DecompositionError):
    """Raised when the profile is too far from the modulated vortex family."""


class NewtonError(DecompositionError):
    """Raised when the Newton iteration does not converge."""


@dataclass
class ModState:
    """Modulation parameters at time `t`.

    Args:
        t: Time, negative
        lam: Scale `λ > 0`
        gamma: Phase `γ`
        b: Real part of `𝐛`
        eta: Imaginary part of `𝐛`
    """

    t: float
    lam: float
    gamma: float
    b: float = 0.0
    eta: float = 0.0

    @property
    def lam_c(self) -> complex:
        return self.lam * np.exp(1j * self.gamma)

    @property
    def b_c(self) -> complex:
        return complex(self.b, self.eta)

    @property
    def B0(self) -> float:
        return float(np.sqrt(abs(self.t)) / self.lam)


def _check_regime(q: complex, t: float):
    if t >= 0:
        raise RegimeError(f"blow-up rates are defined for t < 0, got t={t:g}")
    if q == 0:
        raise RegimeError("blow-up rates need q ≠ 0")


def closed_form(q: complex, nu: complex, t: float) -> ModState:
    """Leading-order `𝛌_{q,ν}` and `𝐛_{q,ν}`.

    `𝛌 = −(√2/4) g q (4it)^{ν/2+1}/|log|t||` with `g = Γ(ν/2)/(Re ν + 1)` and
    `𝐛 = −(ν/2 + 1)|𝛌|²/t`, the leading part of `−𝛌̄∂_t𝛌`. Since `arg(4it) = −π/2` for `t < 0`,
    `|(4it)^{ν/2+1}|² = |4t|^{Re ν+2} e^{π Im ν/2}`: for complex `ν` this `𝐛` is
    `½(ν/2 + 1)|g|²|q|²|4t|^{Re ν+1} e^{π Im ν/2}/|log|t||²`, the balanced point of the modulation system.
    """
    _check_regime(q, t)
    q, nu = complex(q), complex(nu)
    g = gamma_complex(nu / 2) / (nu.real + 1.0)
    log_t = abs(np.log(abs(t)))
    lam_c = -(np.sqrt(2.0) / 4.0) * g * q * cpow(4j * t, nu / 2 + 1) / log_t
    b_c = -(nu / 2 + 1) * abs(lam_c) ** 2 / t
    return ModState(t=t, lam=float(abs(lam_c)), gamma=float(np.angle(lam_c)), b=b_c.real, eta=b_c.imag)


def closed_form_dt(q: complex, nu: complex, t: float) -> complex:
    """Analytic `∂_t 𝛌_{q,ν} = 𝛌[(ν/2 + 1)/t − 1/(t log|t|)]`."""
    lam_c = closed_form(q, nu, t).lam_c
    return lam_c * ((complex(nu) / 2 + 1) / t - 1.0 / (t * np.log(abs(t))))


@dataclass
class RateConsistency:
    """`|𝐛 + 𝛌̄∂_t𝛌| / |𝐛|` against its exact value `1/(|ν/2 + 1| |log|t||)`.

    Args:
        t: Time
        ratio: Measured ratio
        expected: Exact ratio
        threshold: Accepted upper bound, `1.05·expected`
    """

    t: float
    ratio: float
    expected: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.ratio <= self.threshold


def rate_consistency(q: complex, nu: complex, t: float) -> RateConsistency:
    state = closed_form(q, nu, t)
    mismatch = state.b_c + np.conj(state.lam_c) * closed_form_dt(q, nu, t)
    ratio = abs(mismatch) / abs(state.b_c)
    expected = 1.0 / (abs(complex(nu) / 2 + 1) * abs(np.log(abs(t))))
    return RateConsistency(t=t, ratio=float(ratio), expected=float(expected), threshold=1.05 * float(expected))


def _balanced_denominator(
    base: complex, sigma: float, nu: complex, mu: complex | None = None, dmu: complex | None = None
) -> complex:
    """Solve `M = (2 log B₀/(Re ν + 1))[1 + (μ² − (2w − 1)μ − μ')/(w(w − 1))]`, `w = ν/2 + 1`.

    `log B₀ = σ/2 − log|base| + log|M|` couples back into `M`. Without `μ = d log M/dσ` the
    quasi-static value `μ = (½ − Re w)/(log B₀ − 1)`, `μ' = −μ²` is used.
    """
    w = nu / 2 + 1
    m_c = complex(abs(sigma))
    for _ in range(40):
        log_b0 = 0.5 * sigma - np.log(abs(base)) + np.log(abs(m_c))
        if log_b0 <= 1.0:
            raise RegimeError(f"log B₀ = {log_b0:.3g} leaves the modulation regime at σ={sigma:.4g}")
        mu_k = (0.5 - w.real) / (log_b0 - 1.0) if mu is None else mu
        dmu_k = -(mu_k**2) if dmu is None else dmu
        m_c = 2.0 * log_b0 / (nu.real + 1.0) * (1.0 + (mu_k**2 - (2 * w - 1) * mu_k - dmu_k) / (w * (w - 1)))
    return m_c


def corrected_closed_form(q: complex, nu: complex, t: float, step: float = 0.05) -> ModState:
    """`𝛌_{q,ν}` with the `|log|t||` denominator replaced by the balanced `M(σ)`, `σ = log|t|`.

    Writing `𝛌 = −(√2/4) g q (4it)^{ν/2+1}/M`, the modulation system holds up to derivatives of
    `M` beyond the second. This carries the `O(1/|log|t||)` corrections the leading form drops
    and leaves a mismatch of higher order in `1/|log|t||`.
    `𝐛 = (w − μ)|𝛌|²/|t|` with `μ = d log M/dσ`.

    Raises:
        RegimeError: If `t ≥ 0`, `q = 0` or `log B₀ ≤ 1`
    """
    _check_regime(q, t)
    q, nu = complex(q), complex(nu)
    w = nu / 2 + 1
    g = gamma_complex(nu / 2) / (nu.real + 1.0)

    def base(s: float) -> complex:
        return -(np.sqrt(2.0) / 4.0) * g * q * cpow(-4j * np.exp(s), w)

    sigma = float(np.log(abs(t)))
    log_m = [np.log(_balanced_denominator(base(s), s, nu)) for s in (sigma - step, sigma, sigma + step)]
    mu = (log_m[2] - log_m[0]) / (2.0 * step)
    dmu = (log_m[2] - 2.0 * log_m[1] + log_m[0]) / step**2
    lam_c = base(sigma) / _balanced_denominator(base(sigma), sigma, nu, mu, dmu)
    b_c = (w - mu) * abs(lam_c) ** 2 / abs(t)
    return ModState(t=t, lam=float(abs(lam_c)), gamma=float(np.angle(lam_c)), b=b_c.real, eta=b_c.imag)


# --------------------------------------------------------------------------
# Modulation ODE
# --------------------------------------------------------------------------


def modulation_forcing(q: complex, nu: complex, state: ModState) -> complex:
    """`|t|²Λ/λ⁴` with `Λ = λ³e^{−iγ} 8√8π p q (4it)^{(ν−2)/2}/(4π log B₀)`.

    At the closed form this equals `(ν/2 + 1)(ν/2)(Re ν + 1)|log|t||/(2 log B₀)`.
    """
    nu = complex(nu)
    coupling = EIGHT_SQRT8_PI * connection_p(nu) * complex(q) / FOUR_PI
    log_b0 = np.log(state.B0)
    phase = np.exp(-1j * state.gamma) * cpow(4j * state.t, (nu - 2) / 2)
    return complex(state.t**2 * coupling * phase / (state.lam * log_b0))


def mod_ode_integrate(
    q: complex,
    nu: complex,
    start: ModState,
    t_end: float,
    n_out: int = 33,
    rtol: float = 1e-10,
) -> list[ModState]:
    """Integrate the formal system in `σ = log|t|` with an embedded RK4(5) pair.

    With `ds = dt/λ²`: `λ_s/λ + b = 0`, `γ_s + η = 0`, `b_s + b² + η² + Re Λ = 0`,
    `η_s + Im Λ = 0` where `Λ = λ³e^{−iγ} 8√8π p q (4it)^{(ν−2)/2}/(4π log B₀)`.
    The unknowns are `log λ`, `γ`, `β = b|t|/λ²` and `ϑ = η|t|/λ²`, all of order one:

        d log λ/dσ = β,  dγ/dσ = ϑ,
        dβ/dσ = ϑ² − β² + β + Re K,  dϑ/dσ = Im K + ϑ(1 − 2β),  K = |t|²Λ/λ⁴.

    Either direction works. Toward `t = 0` perturbations off the solution selected by
    `λ, b/λ, η/λ → 0` grow like `|t|^{−2}`, so forward runs should start from
    [`boundary_seed`][csslab.modulation.boundary_seed].

    Raises:
        ModulationODEError: If `λ ≤ 0` at the start or `log B₀` drops to 1
    """
    q, nu = complex(q), complex(nu)
    if start.lam <= 0:
        raise ModulationODEError("λ must be positive", start.t)

    def rhs(sigma, y):
        log_lam, gam, beta, theta = y
        forcing = modulation_forcing(q, nu, ModState(t=-np.exp(sigma), lam=np.exp(log_lam), gamma=gam))
        return [
            beta,
            theta,
            theta**2 - beta**2 + beta + forcing.real,
            forcing.imag + theta * (1.0 - 2.0 * beta),
        ]

    def boundary(sigma, y):
        return 0.5 * sigma - y[0] - 1.0

    boundary.terminal = True

    s0, s1 = float(np.log(abs(start.t))), float(np.log(abs(t_end)))
    scale = abs(start.t) / start.lam**2
    y0 = [np.log(start.lam), start.gamma, start.b * scale, start.eta * scale]
    sol = solve_ivp(
        rhs, (s0, s1), y0, method="RK45", t_eval=np.linspace(s0, s1, n_out), events=boundary, rtol=rtol, atol=1e-12
    )
    if sol.status == 1:
        t_stop = -float(np.exp(sol.t_events[0][0]))
        raise ModulationODEError(f"log B₀ reached 1 at t={t_stop:.4g}", t_stop)
    if not sol.success:
        raise ModulationODEError(f"modulation system failed: {sol.message}", -float(np.exp(sol.t[-1])))

    states = []
    for sigma, (log_lam, gam, beta, theta) in zip(sol.t, sol.y.T):
        lam = float(np.exp(log_lam))
        back = lam**2 / np.exp(sigma)
        states.append(
            ModState(t=-float(np.exp(sigma)), lam=lam, gamma=float(gam), b=float(beta * back), eta=float(theta * back))
        )
    return states


def boundary_seed(q: complex, nu: complex, t: float, decades: float = 4.0) -> ModState:
    """State at `t` on the solution with `λ, b/λ, η/λ → 0` as `t → 0⁻`.

    Integrates from [`corrected_closed_form`][csslab.modulation.corrected_closed_form] at
    `t·10^{−decades}` back to `t`; moving away from `t = 0` damps the seed error at least like `|t|^{−1}`.
    """
    start = corrected_closed_form(q, nu, t * 10.0 ** (-decades))
    path = mod_ode_integrate(q, nu, start, t, n_out=2)
    logger.debug(f"Boundary seed at t={t:g} from t={start.t:.3g}: λ={path[-1].lam:.6e}")
    return path[-1]


# --------------------------------------------------------------------------
# Decomposition
# --------------------------------------------------------------------------


@dataclass
class DecompositionResult:
    """Outcome of the decomposition near the modulated vortex.

    Args:
        lam: Fitted scale
        gamma: Fitted phase
        eps: `ε` on the renormalized grid
        ortho_resid: `((ε, 𝒵₁)_r, (ε, 𝒵₂)_r)`
        eps_l2: `‖ε‖_{L²}`
        eps_h1: `‖ε‖_{Ḣ¹}`
        iterations: Newton iterations
    """

    lam: float
    gamma: float
    eps: ComplexField
    ortho_resid: tuple[float, float]
    eps_l2: float
    eps_h1: float
    iterations: int


def renormalized_grid(grid: RadialGrid, lam: float, b0: float, n: int | None = None) -> RadialGrid:
    """Log grid in `y` reaching `max(4B₀, 4/λ)`, so both the vortex core and the support of `z♭` are covered."""
    y_max = max(4.0 * b0, 4.0 / lam, 8.0)
    return RadialGrid.log_uniform(n or grid.n, r_max=y_max, r_min=min(grid.r_min / lam, 1e-6))


def _flat(w: ComplexField, y_grid: RadialGrid, log_lam: float, gam: float) -> ComplexField:
    """`λ e^{−iγ} w(λy)` on the renormalized grid."""
    lam = np.exp(log_lam)
    return ComplexField(y_grid, lam * np.exp(-1j * gam) * resample_values(w, lam * y_grid.radii), 0)


def decompose(
    u: ComplexField,
    rad: RadiationField | None,
    ortho: OrthoProfiles,
    guess: ModState,
    newton_tol: float = 1e-10,
    max_iter: int = 50,
    tube: float = 0.3,
) -> DecompositionResult:
    """Newton iteration on `(log λ, γ)` for `(ε, 𝒵₁)_r = (ε, 𝒵₂)_r = 0`.

    The Jacobian columns are `𝒵`-pairings of `ΛW` and `−iW` with `W = Q + ε`.

    Raises:
        TubeError: If `‖W_guess − Q‖ ≥ tube·‖Q‖`
        NewtonError: If `max_iter` iterations do not reach `newton_tol·‖Q‖²`
    """
    w = u if rad is None else u * np.exp(-1j * rad.gamma_z) - rad.z
    y_grid = ortho.grid
    q = vortex(0, y_grid).field
    q_norm = l2_norm(q)

    x = np.array([np.log(guess.lam), guess.gamma])
    flat = _flat(w, y_grid, *x)
    if (dist := l2_norm(flat - q)) >= tube * q_norm:
        raise TubeError(f"distance {dist:.3e} to the vortex family exceeds {tube:g}·‖Q‖")

    tol = newton_tol * q_norm**2
    for iteration in range(1, max_iter + 1):
        eps = flat - q
        resid = ortho.pairings(eps)
        if np.max(np.abs(resid)) <= tol:
            break
        jac = np.column_stack([ortho.pairings(scaling_gen(flat)), ortho.pairings(flat * -1j)])
        x = x - np.linalg.solve(jac, resid)
        flat = _flat(w, y_grid, *x)
    else:
        worst = np.max(np.abs(resid))
        raise NewtonError(f"Newton did not converge in {max_iter} iterations (residual {worst:.3e})", max_iter)
    if iteration > 10:
        logger.warning(f"Decomposition needed {iteration} Newton iterations")

    return DecompositionResult(
        lam=float(np.exp(x[0])),
        gamma=float(x[1]),
        eps=eps,
        ortho_resid=(float(resid[0]), float(resid[1])),
        eps_l2=l2_norm(eps),
        eps_h1=norms(eps, 0).h1_dot,
        iterations=iteration - 1,
    )


def reconstruct(dec: DecompositionResult, rad: RadiationField | None, grid: RadialGrid) -> ComplexField:
    """`e^{iγ_z}[(Q + ε)_{λ,γ} + z]` on the physical grid."""
    profile = vortex(0, dec.eps.grid).field + dec.eps
    core = rescale(profile, dec.lam, dec.gamma, grid)
    if rad is None:
        return core
    return (core + ComplexField(grid, rad.z.values, 0)) * np.exp(1j * rad.gamma_z)


# --------------------------------------------------------------------------
# Refined parameters
# --------------------------------------------------------------------------


@dataclass
class RefinedParams:
    """Refined modulation diagnostics.

    Args:
        b: Averaged truncated virial functional
        eta: Averaged truncated mass functional
        zeta: Corrected complex scale `ζ`
        B0: `|t|^{1/2}/λ`
        B_range: `(B₀/|log|t||^{avg_lo}, B₀/|log|t||^{avg_hi})`
        P_surrogate: Averaged projected remainder of `L_Q ε`
    """

    b: float
    eta: float
    zeta: complex
    B0: float
    B_range: tuple[float, float]
    P_surrogate: float


def averaging_radii(b0: float, t: float, avg_lo: float = 0.2, avg_hi: float = 0.1, nodes: int = 16) -> np.ndarray:
    """Midpoint nodes in `log B` over `[B₀/L^{avg_lo}, B₀/L^{avg_hi}]`, `L = |log|t||`."""
    if not 0 < avg_hi < avg_lo < 0.25:
        raise ValueError("averaging exponents must satisfy 0 < avg_hi < avg_lo < 1/4")
    log_l = np.log(abs(np.log(abs(t))))
    lo, hi = np.log(b0) - avg_lo * log_l, np.log(b0) - avg_hi * log_l
    return np.exp(lo + (np.arange(nodes) + 0.5) * (hi - lo) / nodes)


def refined_params(
    dec: DecompositionResult,
    t: float,
    rho: NullModeRho,
    avg_lo: float = 0.2,
    avg_hi: float = 0.1,
    nodes: int = 16,
) -> RefinedParams:
    """`b`, `η`, `ζ` and the `P` surrogate from a decomposition at time `t`.

    Raises:
        RegimeError: If `B₀ ≤ 4`
    """
    eps = dec.eps
    y = eps.r
    b0 = float(np.sqrt(abs(t)) / dec.lam)
    if b0 <= 4:
        raise RegimeError(f"refined parameters need B₀ > 4, got {b0:.3g}")
    q = vortex(0, eps.grid).field
    radii = averaging_radii(b0, t, avg_lo, avg_hi, nodes)
    log_b0 = FOUR_PI * np.log(b0)

    b_num = np.mean(
        [
            real_inner(eps, scaling_gen_trunc(q, B) * 1j) + 0.5 * real_inner(eps, scaling_gen_trunc(eps, B) * 1j)
            for B in radii
        ]
    )
    chi_avg = np.mean([Cutoff(B)(y) for B in radii], axis=0)
    eta_num = real_inner(eps, q * chi_avg) + 0.5 * real_inner(eps, eps * chi_avg)

    chi0 = Cutoff(b0)(y)
    correction = real_inner(eps, q * (y**2 * chi0 / 4.0)) + 1j * real_inner(eps, rho.field * (1j * chi0))
    zeta = dec.lam * np.exp(1j * dec.gamma) * (1.0 + correction / log_b0)

    l_eps = lin_ops(vortex(0, eps.grid)).l_q(eps)
    p_vals = []
    for B in radii:
        direction = q * (0.5 * y * Cutoff(B / 2)(y))
        v = l_eps
        for e in (direction, direction * 1j):
            v = v - e * (real_inner(e, l_eps) / real_inner(e, e))
        p_vals.append(real_inner(v, v * Cutoff(B)(y)))

    return RefinedParams(
        b=float(b_num / log_b0),
        eta=float(eta_num / log_b0),
        zeta=complex(zeta),
        B0=b0,
        B_range=(float(b0 / abs(np.log(abs(t))) ** avg_lo), float(b0 / abs(np.log(abs(t))) ** avg_hi)),
        P_surrogate=float(np.mean(p_vals)),
    )


# --------------------------------------------------------------------------
# Interaction with the radiation and the modified energy
# --------------------------------------------------------------------------


def z_flat(spec: RadiationSpec, state: ModState, y_grid: RadialGrid) -> ComplexField:
    """`z♭ = λ e^{−iγ} z(λy)`, sampled directly at the physical radii `λy`."""
    z = z_values(spec, state.t, y_grid.scaled(state.lam))
    return ComplexField(y_grid, state.lam * np.exp(-1j * state.gamma) * z.values, spec.frak_m)


@dataclass
class Interaction:
    """`R_{Q,z♭} = ∇E[Q + z♭] − ∇Ẽ[z♭] − θ_{z♭}Q` and its pairings with the modulation directions.

    Args:
        field: `R_{Q,z♭}` on the renormalized grid
        ip_lambda_q: `(R, ΛQ)_r`
        ip_iq: `(R, iQ)_r`
        pred_lambda_q: `8√8π λ³ Re(e^{−iγ} p q (4it)^{(ν−2)/2})`
        pred_iq: `−8√8π λ³ Im(e^{−iγ} p q (4it)^{(ν−2)/2})`
    """

    field: ComplexField
    ip_lambda_q: float
    ip_iq: float
    pred_lambda_q: float
    pred_iq: float


def interaction_prediction(spec: RadiationSpec, state: ModState) -> complex:
    phase = np.exp(-1j * state.gamma) * cpow(4j * state.t, (spec.nu - 2) / 2)
    return EIGHT_SQRT8_PI * state.lam**3 * spec.p * spec.q * phase


def interaction_RQz(spec: RadiationSpec, state: ModState, y_grid: RadialGrid) -> Interaction:
    """Assemble `R_{Q,z♭}` without differentiating `z`.

    Since `∇E[Q] = 0` and `Δ^{(0)} − Δ^{(−2)} = 4/y²`,
    `R = [𝒩^{(0)}(Q + z♭) − 𝒩^{(0)}(Q)] − 𝒩^{(−2)}(z♭) − 4z♭/y² − θ_{z♭}Q`. The bracket is
    expanded term by term: `z♭` is of order `λ³` against `Q` of order one, so differencing
    `𝒩^{(0)}` would leave only rounding noise once `|t|` is small.
    """
    q = vortex(0, y_grid).field
    zf = z_flat(spec, state, y_grid)
    y = y_grid.radii
    as_radial = ComplexField(y_grid, zf.values, 0)
    field = (
        nonlinearity_increment(q, as_radial, 0)
        - ComplexField(y_grid, nonlinearity_total(zf, spec.frak_m).values, 0)
        - as_radial * (4.0 / y**2)
        - q * theta_z(zf, spec.frak_m)
    )
    lam_q = q.with_values(vortex_scaling_values(y, 0))
    pred = interaction_prediction(spec, state)
    return Interaction(
        field=field,
        ip_lambda_q=real_inner(field, lam_q),
        ip_iq=real_inner(field, q * 1j),
        pred_lambda_q=float(pred.real),
        pred_iq=float(-pred.imag),
    )


def energy_functional(spec: RadiationSpec, state: ModState, dec: DecompositionResult) -> float:
    """`ℰ = E[u] − E[Q♯ + z] − (∇Ẽ[z], ε♯)_r`, evaluated in the renormalized frame.

    Each piece scales like `λ^{−2}`; `∇Ẽ[z♭] = L_{z♭}^{(𝔪)*} D_{z♭}^{(𝔪)} z♭` is the self-dual
    assembly of the `𝔪`-equivariant gradient.
    """
    y_grid = dec.eps.grid
    q = vortex(0, y_grid).field
    flat_state = ModState(t=state.t, lam=dec.lam, gamma=dec.gamma)
    zf = z_flat(spec, flat_state, y_grid)
    zr = ComplexField(y_grid, zf.values, 0)
    grad = ComplexField(y_grid, grad_energy_selfdual(zf, spec.frak_m).values, 0)
    value = energy(q + dec.eps + zr, 0) - energy(q + zr, 0) - real_inner(grad, dec.eps)
    return float(value / dec.lam**2)


# --------------------------------------------------------------------------
# Prescribed initial data
# --------------------------------------------------------------------------


@dataclass
class InitialData:
    """Prescribed data `u^{(τ)}(τ)`.

    Args:
        u: Data on the physical grid
        eps: `ε_{q,ν}(τ)` on the renormalized grid
        state: Closed-form modulation parameters at `τ`
        B0: `|τ|^{1/2}/λ_{q,ν}(τ)`
        gamma_z: `γ_z(τ)`
        radiation: The radiation at `τ`
    """

    u: ComplexField
    eps: ComplexField
    state: ModState
    B0: float
    gamma_z: float
    radiation: RadiationField


def prescribed_eps(state: ModState, y_grid: RadialGrid, rho: NullModeRho) -> ComplexField:
    """`ε = b(−iy²Q/4)χ_{B₀} + η ρχ_{B₀} − (1 − χ_{B₀})Q`."""
    q = vortex(0, y_grid).field
    y = y_grid.radii
    chi = Cutoff(state.B0)(y)
    return q * (-0.25j * state.b * y**2 * chi) + rho.field * (state.eta * chi) - q * (1.0 - chi)


def initial_data(spec: RadiationSpec, tau: float, grid: RadialGrid, rho: NullModeRho) -> InitialData:
    """`u^{(τ)}(τ) = e^{iγ_z}[(Q + ε_{q,ν})_{λ_{q,ν},γ_{q,ν}} + z](τ)`, with `ε` built on the grid of `rho`.

    Raises:
        RegimeError: If `B₀ ≤ 10`
    """
    state = closed_form(spec.q, spec.nu, tau)
    if state.B0 <= 10:
        raise RegimeError(f"B₀ = {state.B0:.3g} too small at τ={tau:g}")
    eps = prescribed_eps(state, rho.field.grid, rho)
    profile = vortex(0, eps.grid).field + eps
    rad = z_full(spec, tau, grid)
    phase = rad.gamma_z
    core = rescale(profile, state.lam, state.gamma, grid)
    u = (core + ComplexField(grid, rad.z.values, 0)) * np.exp(1j * phase)
    logger.info(f"Initial data at τ={tau:g}: λ={state.lam:.4e}, B₀={state.B0:.2f}, γ_z={phase:.4e}")
    return InitialData(u=u, eps=eps, state=state, B0=state.B0, gamma_z=phase, radiation=rad)
