"""Special functions for the self-similar radiation profile.

Complex Γ, Kummer's `M(a, c, z)`, the asymptotic and regular fundamental systems of

    𝒜_{𝔪,ν} = ∂_YY + Y^{-1}∂_Y − 𝔪²/Y² − (i/2)Y∂_Y + iν/2

and the connection coefficient `α(ν)` linking them. Powers of complex numbers
use the principal branch `Arg ∈ (−π, π]` throughout.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp
from scipy.special import rgamma

logger = logging.getLogger(__name__)

SeriesKind = Literal["f1", "f2", "e1"]

LANCZOS_G = 7
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

KUMMER_SERIES_RADIUS = 12.0
KUMMER_MAX_TERMS = 600


class PoleError(Exception):
    """Raised when Γ is evaluated at a nonpositive integer."""


class ConvergenceError(Exception):
    """Raised when a series or its ODE continuation fails to converge.

    Args:
        message: Error message
        terms: Number of terms or steps consumed
    """

    def __init__(self, message: str, terms: int = 0):
        super().__init__(message)
        self.terms = terms


class MatchingError(Exception):
    """Raised when the connection fit on the matching window is ill conditioned.

    Args:
        message: Error message
        residual: Relative residual of the fit
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def cpow(base: complex | NDArray, exponent: complex) -> complex | NDArray:
    """Principal-branch power `exp(w (ln|z| + i Arg z))`."""
    return np.exp(exponent * np.log(np.asarray(base, dtype=np.complex128)))


# --------------------------------------------------------------------------
# Gamma
# --------------------------------------------------------------------------


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def gamma_complex(z: complex) -> complex:
    """Γ(z) by the 9-term Lanczos approximation with `g = 7`.

    Raises:
        PoleError: If `z` is a nonpositive integer
    """
    z = complex(z)
    if _is_pole(z):
        raise PoleError(f"Γ has a pole at {z.real:g}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma_complex(1.0 - z))
    z -= 1.0
    x = LANCZOS_COEFFS[0]
    for k in range(1, LANCZOS_G + 2):
        x += LANCZOS_COEFFS[k] / (z + k)
    t = z + LANCZOS_G + 0.5
    return cmath.sqrt(2.0 * cmath.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


# --------------------------------------------------------------------------
# Kummer M
# --------------------------------------------------------------------------


def _kummer_series(a: complex, c: complex, z: NDArray) -> NDArray:
    """Taylor series with Neumaier-compensated summation, vectorized over `z`."""
    total = np.ones_like(z)
    comp = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(KUMMER_MAX_TERMS):
        term = term * (a + n) / ((c + n) * (n + 1)) * z
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        if n > abs(a) and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            return total + comp
    raise ConvergenceError(f"Kummer series did not converge for |z| ≤ {np.max(np.abs(z)):.3g}", KUMMER_MAX_TERMS)


def kummer_ray(a: complex, c: complex, omega: complex, rho: ArrayLike) -> tuple[NDArray, NDArray]:
    """`M(a, c, ρω)` and `M'(a, c, ρω)` for `ρ ≥ 0` along the ray of unit direction `ω`.

    The compensated series is used for `ρ ≤ 12`; beyond, the Kummer ODE

        M_ρρ + (c/ρ − ω)M_ρ − (aω/ρ)M = 0

    is integrated from `ρ = 12` with the series values as initial data.

    Raises:
        ConvergenceError: If the series or the ODE continuation fails
    """
    if _is_pole(complex(c)):
        raise PoleError(f"Kummer M undefined for c = {complex(c).real:g}")
    rho = np.asarray(rho, dtype=np.float64)
    m_val = np.empty(rho.shape, dtype=np.complex128)
    dm_val = np.empty(rho.shape, dtype=np.complex128)

    near = rho <= KUMMER_SERIES_RADIUS
    if np.any(near):
        z = rho[near] * omega
        m_val[near] = _kummer_series(a, c, z.astype(np.complex128))
        dm_val[near] = (a / c) * _kummer_series(a + 1, c + 1, z.astype(np.complex128))

    far = ~near
    if np.any(far):
        z0 = np.array([KUMMER_SERIES_RADIUS * omega], dtype=np.complex128)
        m0 = _kummer_series(a, c, z0)[0]
        dm0 = (a / c) * _kummer_series(a + 1, c + 1, z0)[0]

        def rhs(r, y):
            return [y[1], -(c / r - omega) * y[1] + (a * omega / r) * y[0]]

        targets = np.unique(rho[far])
        sol = solve_ivp(
            rhs,
            (KUMMER_SERIES_RADIUS, float(targets[-1])),
            [m0, omega * dm0],
            method="DOP853",
            t_eval=targets,
            rtol=1e-12,
            atol=1e-14,
        )
        if not sol.success:
            raise ConvergenceError(f"Kummer ODE continuation failed: {sol.message}", sol.nfev)
        index = np.searchsorted(targets, rho[far])
        m_val[far] = sol.y[0][index]
        dm_val[far] = sol.y[1][index] / omega
    return m_val, dm_val


def kummer_m(a: complex, c: complex, z: complex) -> complex:
    rho = abs(z)
    omega = z / rho if rho > 0 else 1.0
    value, _ = kummer_ray(a, c, omega, np.array([rho]))
    return complex(value[0])


def kummer_terms(a: complex, c: complex, z: complex, n_terms: int) -> list[complex]:
    """Individual Taylor terms `(a)_n z^n / ((c)_n n!)`."""
    terms = [1.0 + 0j]
    for n in range(n_terms - 1):
        terms.append(terms[-1] * (a + n) / ((c + n) * (n + 1)) * z)
    return terms


# --------------------------------------------------------------------------
# The self-similar ODE and its fundamental systems
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfSimilarODE:
    """The operator `𝒜_{𝔪,ν}`.

    Args:
        nu: Complex exponent with `Re ν > −|𝔪| − 2`
        frak_m: Nonzero equivariance index of the radiation
    """

    nu: complex
    frak_m: int = -2

    def __post_init__(self):
        if self.frak_m == 0:
            raise ValueError("𝔪 must be nonzero")
        if complex(self.nu).real <= -abs(self.frak_m) - 2:
            raise ValueError(f"Re ν must exceed {-abs(self.frak_m) - 2}")

    @property
    def a(self) -> complex:
        return -(self.nu - abs(self.frak_m)) / 2

    @property
    def c(self) -> int:
        return abs(self.frak_m) + 1

    def residual(self, y: NDArray, v: NDArray, dv: NDArray, d2v: NDArray) -> NDArray:
        m2 = self.frak_m**2
        return d2v + dv / y - m2 * v / y**2 - 0.5j * y * dv + 0.5j * self.nu * v


@dataclass(frozen=True)
class AsymptoticSeries:
    """Coefficients of one of the series `f₁`, `f₂`, `e₁` (normalized by `c_0 = 1`).

    `f₁ ~ Σ c_n Y^{ν−2n}`, `f₂ ~ e^{iY²/4} Σ c_n Y^{−(ν+2)−2n}`, `e₁ = Σ c_n Y^{|𝔪|+2n}`.

    Args:
        kind: Which series
        ode: The operator the series solves
        coeffs: Complex coefficients `c_0, ..., c_{K−1}`
    """

    kind: SeriesKind
    ode: SelfSimilarODE
    coeffs: tuple[complex, ...] = field(default_factory=tuple)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def exponents(self) -> NDArray[np.complex128]:
        n = np.arange(self.order)
        nu = self.ode.nu
        if self.kind == "f1":
            return nu - 2 * n
        if self.kind == "f2":
            return -(nu + 2) - 2 * n
        return abs(self.ode.frak_m) + 2 * n + 0j

    def evaluate(self, y: ArrayLike) -> tuple[NDArray, NDArray]:
        """Values and `Y`-derivatives of the truncated series."""
        y = np.asarray(y, dtype=np.float64)
        log_y = np.log(y)[..., None]
        p = self.exponents()
        c = np.asarray(self.coeffs)
        powers = np.exp(p * log_y)
        w = powers @ c
        dw = (powers * p / y[..., None]) @ c
        if self.kind != "f2":
            return w, dw
        phase = np.exp(0.25j * y**2)
        return phase * w, phase * (dw + 0.5j * y * w)

    def valid_from(self) -> float:
        """Smallest `Y` at which the retained terms of `f₁`, `f₂` still decrease; 0 for the convergent `e₁`."""
        if self.kind == "e1" or self.order < 2:
            return 0.0
        c = np.abs(np.asarray(self.coeffs))
        ratios = np.divide(c[1:], c[:-1], out=np.zeros(self.order - 1), where=c[:-1] > 0)
        return float(np.sqrt(ratios.max()))


def series_coeffs(kind: SeriesKind, nu: complex, frak_m: int = -2, order: int = 12) -> AsymptoticSeries:
    """Coefficients from the two-term recursions of `𝒜_{𝔪,ν} V = 0`.

    - `f₁`: `c_n = i((ν − 2n + 2)² − 𝔪²)/n · c_{n−1}`
    - `f₂`: `c_n = −i((ν + 2n)² − 𝔪²)/n · c_{n−1}`
    - `e₁`: `c_{n+1} = (i/4)(a + n)/((n + 1)(c + n)) · c_n` with `a = −(ν − |𝔪|)/2`, `c = |𝔪| + 1`
    """
    if order < 1:
        raise ValueError("series order must be positive")
    ode = SelfSimilarODE(complex(nu), frak_m)
    m2 = frak_m**2
    coeffs = [1.0 + 0j]
    for n in range(1, order):
        prev = coeffs[-1]
        if kind == "f1":
            coeffs.append(1j * ((ode.nu - 2 * n + 2) ** 2 - m2) / n * prev)
        elif kind == "f2":
            coeffs.append(-1j * ((ode.nu + 2 * n) ** 2 - m2) / n * prev)
        else:
            k = n - 1
            coeffs.append(0.25j * (ode.a + k) / ((k + 1) * (ode.c + k)) * prev)
    return AsymptoticSeries(kind=kind, ode=ode, coeffs=tuple(coeffs))


def _warn_below_validity(series: AsymptoticSeries, y: NDArray):
    if y.size and (edge := series.valid_from()) > (y_min := float(np.min(y))):
        logger.warning(
            f"Asymptotic series {series.kind} for ν={series.ode.nu:.4g} evaluated at Y={y_min:.3g}, "
            f"below its validity radius {edge:.3g}"
        )


def eval_f1(y: ArrayLike, nu: complex, frak_m: int = -2, order: int = 12) -> tuple[NDArray, NDArray]:
    series = series_coeffs("f1", nu, frak_m, order)
    _warn_below_validity(series, np.asarray(y, dtype=np.float64))
    return series.evaluate(y)


def eval_f2(y: ArrayLike, nu: complex, frak_m: int = -2, order: int = 12) -> tuple[NDArray, NDArray]:
    series = series_coeffs("f2", nu, frak_m, order)
    _warn_below_validity(series, np.asarray(y, dtype=np.float64))
    return series.evaluate(y)


def eval_e1(y: ArrayLike, nu: complex, frak_m: int = -2) -> tuple[NDArray, NDArray]:
    """`e₁(Y) = Y^{|𝔪|} M(a, c, iY²/4)` and its derivative, exact through Kummer M."""
    ode = SelfSimilarODE(complex(nu), frak_m)
    y = np.asarray(y, dtype=np.float64)
    k = abs(frak_m)
    m_val, dm_val = kummer_ray(ode.a, ode.c, 1j, 0.25 * y**2)
    value = y**k * m_val
    deriv = k * y ** (k - 1) * m_val + y**k * dm_val * 0.5j * y
    return value, deriv


# --------------------------------------------------------------------------
# Connection
# --------------------------------------------------------------------------


def connection_p(nu: complex, frak_m: int = -2) -> complex:
    """`p = Γ((ν + |𝔪|)/2 + 1)/Γ(|𝔪| + 1)`."""
    k = abs(frak_m)
    return gamma_complex((nu + k) / 2 + 1) / gamma_complex(k + 1)


def connection_alpha_closed(nu: complex, frak_m: int = -2) -> complex:
    """`α = (4i)^w p Γ(c)/Γ(a) (i/4)^{a−c}`, zero when `a` is a nonpositive integer."""
    ode = SelfSimilarODE(complex(nu), frak_m)
    w = -ode.a
    kappa = cpow(4j, w) * connection_p(nu, frak_m)
    return complex(kappa * gamma_complex(ode.c) * rgamma(ode.a) * cpow(0.25j, ode.a - ode.c))


@dataclass(frozen=True)
class Connection:
    """Fitted connection `f₁ + αf₂ = κ e₁` on a matching window.

    Args:
        nu: Exponent `ν`
        frak_m: Equivariance index `𝔪`
        alpha: Fitted `α(ν)`
        p: `Γ((ν + |𝔪|)/2 + 1)/Γ(|𝔪| + 1)`
        kappa: Fitted proportionality constant
        kappa_expected: `(4i)^{(ν−|𝔪|)/2} p`
        residual: Relative L² residual of the fit on the window
        window: Matching window in `Y`
        order: Number of asymptotic series terms
    """

    nu: complex
    frak_m: int
    alpha: complex
    p: complex
    kappa: complex
    kappa_expected: complex
    residual: float
    window: tuple[float, float]
    order: int

    @property
    def kappa_error(self) -> float:
        return abs(self.kappa / self.kappa_expected - 1.0)


@lru_cache(maxsize=64)
def connection(
    nu: complex,
    frak_m: int = -2,
    window: tuple[float, float] = (10.0, 16.0),
    order: int = 12,
    samples: int = 64,
    max_residual: float = 1e-4,
) -> Connection:
    """Least-squares match of `f₁ + αf₂` to `κ e₁` on `window`.

    Raises:
        MatchingError: If the relative residual exceeds `max_residual`
    """
    nu = complex(nu)
    y = np.linspace(*window, samples)
    f1, _ = eval_f1(y, nu, frak_m, order)
    f2, _ = eval_f2(y, nu, frak_m, order)
    e1, _ = eval_e1(y, nu, frak_m)
    design = np.column_stack([e1, -f2])
    (kappa, alpha), *_ = np.linalg.lstsq(design, f1, rcond=None)
    residual = float(np.linalg.norm(f1 + alpha * f2 - kappa * e1) / np.linalg.norm(f1))
    p = connection_p(nu, frak_m)
    kappa_expected = complex(cpow(4j, (nu - abs(frak_m)) / 2) * p)
    if residual > max_residual:
        raise MatchingError(f"connection fit residual {residual:.3e} exceeds {max_residual:g} for ν={nu}", residual)
    logger.debug(f"Connection for ν={nu}: α={alpha:.6g}, residual={residual:.2e}")
    return Connection(
        nu=nu,
        frak_m=frak_m,
        alpha=complex(alpha),
        p=p,
        kappa=complex(kappa),
        kappa_expected=kappa_expected,
        residual=residual,
        window=window,
        order=order,
    )
