"""Radial grids, quadrature, differential operators and norms for equivariant profiles.

All integrals follow the convention `∫f = 2π ∫ f(r) r dr` of the two-dimensional
measure restricted to radial profiles.
"""

import io
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline
from scipy.sparse import csc_array, diags_array

logger = logging.getLogger(__name__)

SpacingKind = Literal["log", "uniform"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing positive radii with trapezoid quadrature weights.

    Grids hash by identity, so operators built for a grid can be cached.

    Args:
        radii: Sample radii `r_0 < ... < r_{N-1}`
        kind: Spacing of the radii, `log` (uniform in `log r`) or `uniform`
    """

    radii: NDArray[np.float64]
    kind: SpacingKind

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=np.float64)
        if r.ndim != 1 or r.size < 4:
            raise ValueError("radial grid needs at least 4 radii")
        if r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    @classmethod
    def log_uniform(cls, n: int = 4096, r_max: float = 100.0, r_min: float | None = None) -> "RadialGrid":
        r_min = 1e-6 * r_max if r_min is None else r_min
        return cls(np.geomspace(r_min, r_max, n), "log")

    @classmethod
    def uniform(cls, n: int, r_max: float) -> "RadialGrid":
        return cls(np.linspace(r_max / n, r_max, n), "uniform")

    @property
    def n(self) -> int:
        return self.radii.size

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    @property
    def r_min(self) -> float:
        return float(self.radii[0])

    @property
    def step(self) -> float:
        """Log spacing `h` on log grids, radial spacing `dr` on uniform grids."""
        if self.kind == "log":
            return float(np.log(self.radii[1] / self.radii[0]))
        return float(self.radii[1] - self.radii[0])

    @cached_property
    def weights(self) -> NDArray[np.float64]:
        """Trapezoid weights `w_j` with `∫_0^{r_max} g dr ≈ Σ w_j g_j` for `g(0) = 0`.

        The origin cell `[0, r_0]` is folded into `w_0`.
        """
        dr = np.diff(self.radii, prepend=0.0)
        w = np.zeros_like(self.radii)
        w += 0.5 * dr
        w[:-1] += 0.5 * dr[1:]
        return w

    @cached_property
    def own_weights(self) -> NDArray[np.float64]:
        """Left half `½(r_j − r_{j−1})` of each trapezoid cell, with `r_{−1} = 0`."""
        return 0.5 * np.diff(self.radii, prepend=0.0)

    @cached_property
    def log_radii(self) -> NDArray[np.float64]:
        return np.log(self.radii)

    def scaled(self, factor: float) -> "RadialGrid":
        """Grid with radii multiplied by `factor`, keeping the spacing kind."""
        return RadialGrid(self.radii * factor, self.kind)

    def refined(self) -> "RadialGrid":
        """Grid over the same interval with the spacing halved."""
        if self.kind == "log":
            return RadialGrid(np.geomspace(self.r_min, self.r_max, 2 * self.n - 1), "log")
        return RadialGrid.uniform(2 * self.n, self.r_max)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "r_min": self.r_min, "r_max": self.r_max}


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of an `m`-equivariant radial profile.

    Args:
        grid: Grid the samples live on
        values: One complex sample per radius
        m: Equivariance index
    """

    grid: RadialGrid
    values: NDArray[np.complex128]
    m: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.radii.shape:
            raise ValueError(f"field has {v.size} samples, grid has {self.grid.n}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: RadialGrid, m: int = 0) -> "ComplexField":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128), m)

    @classmethod
    def from_function(cls, grid: RadialGrid, func, m: int = 0) -> "ComplexField":
        return cls(grid, func(grid.radii), m)

    @property
    def r(self) -> NDArray[np.float64]:
        return self.grid.radii

    def with_values(self, values: ArrayLike, m: int | None = None) -> "ComplexField":
        return ComplexField(self.grid, np.asarray(values), self.m if m is None else m)

    def conj(self) -> "ComplexField":
        return self.with_values(np.conj(self.values))

    def abs2(self) -> NDArray[np.float64]:
        return self.values.real**2 + self.values.imag**2

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return self.with_values(self.values + _values(other))

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return self.with_values(self.values - _values(other))

    def __mul__(self, other) -> "ComplexField":
        return self.with_values(self.values * _values(other))

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexField":
        return self.with_values(-self.values)


def _values(obj) -> NDArray | complex:
    return obj.values if isinstance(obj, ComplexField) else obj


# --------------------------------------------------------------------------
# Cutoff
# --------------------------------------------------------------------------


def smoothstep_cutoff(x: ArrayLike) -> NDArray[np.float64]:
    """C² bump: 1 on `x ≤ 1`, 0 on `x ≥ 2`, quintic smoothstep in between."""
    t = np.clip(np.asarray(x, dtype=np.float64) - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def smoothstep_cutoff_d1(x: ArrayLike) -> NDArray[np.float64]:
    t = np.clip(np.asarray(x, dtype=np.float64) - 1.0, 0.0, 1.0)
    return -30.0 * t**2 * (t - 1.0) ** 2


def smoothstep_cutoff_d2(x: ArrayLike) -> NDArray[np.float64]:
    t = np.clip(np.asarray(x, dtype=np.float64) - 1.0, 0.0, 1.0)
    return -60.0 * t * (2.0 * t - 1.0) * (t - 1.0)


@dataclass(frozen=True)
class Cutoff:
    """Rescaled cutoff `χ_A(r) = χ(r/A)`, supported in `r ≤ 2A`.

    Args:
        scale: The scale `A`
    """

    scale: float = 1.0

    def __call__(self, r: ArrayLike) -> NDArray[np.float64]:
        return smoothstep_cutoff(np.asarray(r) / self.scale)

    def d1(self, r: ArrayLike) -> NDArray[np.float64]:
        return smoothstep_cutoff_d1(np.asarray(r) / self.scale) / self.scale

    def d2(self, r: ArrayLike) -> NDArray[np.float64]:
        return smoothstep_cutoff_d2(np.asarray(r) / self.scale) / self.scale**2


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------


def integrate(f: ComplexField | NDArray, grid: RadialGrid | None = None) -> complex:
    """`∫f = 2π Σ w_j f_j r_j`."""
    grid, values = _unpack(f, grid)
    return complex(TWO_PI * np.sum(grid.weights * values * grid.radii))


def integrate_real(values: NDArray, grid: RadialGrid) -> float:
    return float(TWO_PI * np.sum(grid.weights * np.real(values) * grid.radii))


def cumulative_primitive(f: ComplexField | NDArray, grid: RadialGrid | None = None) -> NDArray:
    """`r ↦ ∫_0^r f(r') r' dr'`.

    Cumulative trapezoid rule including the origin cell `[0, r_0]`. Pairs with
    [`tail_logweight`][csslab.radial.tail_logweight] as an exact discrete adjoint:
    `Σ w r a·T(c) = Σ w r (c/r²)·P(a)`.
    """
    grid, values = _unpack(f, grid)
    g = values * grid.radii
    wg = grid.weights * g
    return np.cumsum(wg) - wg + grid.own_weights * g


def tail_logweight(
    f: ComplexField | NDArray,
    grid: RadialGrid | None = None,
    boundary_tol: float = 1e-4,
    closure: bool = False,
) -> NDArray:
    """`r ↦ ∫_r^∞ f(r') dr'/r'`, truncated at `r_max`.

    With `closure`, the part beyond `r_max` is added from a power-law fit to the
    last two samples (see [`power_tail`][csslab.radial.power_tail]).
    """
    grid, values = _unpack(f, grid)
    if (boundary := float(np.abs(values[-1]) * grid.r_max)) > boundary_tol:
        logger.warning(f"Tail integral truncated with boundary mass {boundary:.3e} at r_max={grid.r_max:g}")
    g = values / grid.radii
    wg = grid.weights * g
    out = np.cumsum(wg[::-1])[::-1] - wg + grid.own_weights * g
    if closure:
        out = out + power_tail(values, grid)
    return out


def power_tail(f: ComplexField | NDArray, grid: RadialGrid | None = None) -> float:
    """`∫_{r_max}^∞ f dr/r` for `f ≈ c r^{-k}` fitted to the last two samples.

    Zero unless the samples are real, share a sign and decay with `k > ½`.
    """
    grid, values = _unpack(f, grid)
    a, b = np.real(values[-2]), np.real(values[-1])
    if a * b <= 0.0:
        return 0.0
    k = -np.log(b / a) / np.log(grid.radii[-1] / grid.radii[-2])
    if k <= 0.5:
        return 0.0
    return float(b / k)


def prefix_logweight(f: ComplexField | NDArray, grid: RadialGrid | None = None) -> NDArray:
    """`r ↦ ∫_0^r f(r') dr'/r'`, the complement of the tail in `∫_0^∞ f dr/r`."""
    grid, values = _unpack(f, grid)
    total = np.sum(grid.weights * values / grid.radii)
    return total - tail_logweight(values, grid, boundary_tol=np.inf)


def _unpack(f: ComplexField | NDArray, grid: RadialGrid | None) -> tuple[RadialGrid, NDArray]:
    if isinstance(f, ComplexField):
        return f.grid, f.values
    if grid is None:
        raise ValueError("a grid is required for raw sample arrays")
    return grid, np.asarray(f)


# --------------------------------------------------------------------------
# Differential operators
# --------------------------------------------------------------------------


def d_r_values(values: NDArray, grid: RadialGrid) -> NDArray:
    if grid.kind == "log":
        return np.gradient(values, grid.log_radii, edge_order=2) / grid.radii
    return np.gradient(values, grid.radii, edge_order=2)


def d_r(f: ComplexField) -> ComplexField:
    return f.with_values(d_r_values(f.values, f.grid))


def d_pm(f: ComplexField, m: int, sign: int) -> ComplexField:
    """`∂_± = ∂_r ∓ m/r`; `sign=+1` selects `∂_+`."""
    return f.with_values(d_r_values(f.values, f.grid) - sign * m * f.values / f.r)


@lru_cache(maxsize=64)
def laplacian_matrix(grid: RadialGrid, m: int) -> csc_array:
    """Tridiagonal `Δ^{(m)} = ∂_rr + r^{-1}∂_r − m²/r²`, zero Dirichlet data at `r_max`.

    The stencil is conservative, so away from the last node the matrix is
    symmetric in the quadrature inner product and Crank–Nicolson keeps the mass.
    """
    r = grid.radii
    n = grid.n
    if grid.kind == "log":
        h = grid.step
        inv_r2 = 1.0 / r**2
        main = (-2.0 / h**2 - m**2) * inv_r2
        lower = inv_r2[1:] / h**2
        upper = inv_r2[:-1] / h**2
        # origin cell: symmetric against the weight ½r_0²e^h and exact on r^{|m|}
        upper[0] = -np.expm1(-2.0 * h) / h**2 * inv_r2[0]
        main[0] = -np.exp(abs(m) * h) * upper[0]
    else:
        dr = grid.step
        r_half = r[:-1] + 0.5 * dr
        r_left = np.concatenate([[0.5 * dr], r_half])
        r_right = np.concatenate([r_half, [r[-1] + 0.5 * dr]])
        main = -(r_left + r_right) / (r * dr**2) - m**2 / r**2
        if m == 0:
            # zero flux through the origin cell
            main[0] += r_left[0] / (r[0] * dr**2)
        lower = r_half / (r[1:] * dr**2)
        upper = r_half / (r[:-1] * dr**2)
    return diags_array([lower, main, upper], offsets=[-1, 0, 1], shape=(n, n), format="csc")


def laplacian_m(f: ComplexField, m: int | None = None) -> ComplexField:
    m = f.m if m is None else m
    return f.with_values(laplacian_matrix(f.grid, m) @ f.values)


def laplacian_open(f: ComplexField, m: int | None = None) -> ComplexField:
    """`Δ^{(m)}` for profiles that do not vanish at `r_max`.

    Same interior stencil as [`laplacian_matrix`][csslab.radial.laplacian_matrix], but the
    ghost value beyond `r_max` is extrapolated quadratically instead of set to
    zero. On log grids the first node uses a ghost fitted to `a r^{|m|} + b r^{|m|+2}`
    rather than `a r^{|m|}`, which keeps the residual of smooth profiles second
    order at the first node.
    """
    m = f.m if m is None else m
    grid = f.grid
    v = f.values
    out = laplacian_matrix(grid, m) @ v
    ghost = 3.0 * v[-1] - 3.0 * v[-2] + v[-3]
    r_end = grid.r_max
    h = grid.step
    if grid.kind == "log":
        out[-1] += ghost / (h**2 * r_end**2)
        p = abs(m)
        fitted = np.exp(-p * h) * (1.0 + np.exp(-2.0 * h)) * v[0] - np.exp(-(2 * p + 2) * h) * v[1]
        out[0] = (fitted - 2.0 * v[0] + v[1]) / (h**2 * grid.r_min**2) - m**2 * v[0] / grid.r_min**2
    else:
        out[-1] += ghost * (r_end + 0.5 * h) / (r_end * h**2)
    return f.with_values(out)


def scaling_gen(f: ComplexField) -> ComplexField:
    """`Λf = r∂_r f + f`."""
    return f.with_values(f.r * d_r_values(f.values, f.grid) + f.values)


def scaling_gen_trunc(f: ComplexField, scale: float) -> ComplexField:
    """`Λ_A f = χ_A Λf + ½ r χ_A' f`, antisymmetric in the real inner product."""
    cut = Cutoff(scale)
    return f.with_values(cut(f.r) * scaling_gen(f).values + 0.5 * f.r * cut.d1(f.r) * f.values)


# --------------------------------------------------------------------------
# Inner products and norms
# --------------------------------------------------------------------------


def real_inner(f: ComplexField, g: ComplexField) -> float:
    """`(f, g)_r = ∫ Re(f̄ g)`."""
    return integrate_real(np.conj(f.values) * g.values, f.grid)


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(max(real_inner(f, f), 0.0)))


def _l2(values: NDArray, grid: RadialGrid) -> float:
    return float(np.sqrt(max(integrate_real(np.abs(values) ** 2, grid), 0.0)))


def log_minus_bracket(r: NDArray) -> NDArray:
    """`⟨log_− r⟩ = (1 + max(−log r, 0)²)^{1/2}`."""
    return np.sqrt(1.0 + np.maximum(-np.log(r), 0.0) ** 2)


@dataclass
class Norms:
    """Norms of a radial profile.

    Args:
        l2: `‖f‖_{L²}`
        h1_dot: `‖f‖_{Ḣ¹_m} = (‖∂_r f‖² + m²‖f/r‖²)^{1/2}`
        h11: `(‖f‖²_{L²} + ‖f‖²_{Ḣ¹_m} + ‖rf‖²_{L²})^{1/2}`
        h1_dot_log: `‖∂_r f‖ + ‖⟨log_− r⟩^{-1} r^{-1} f‖`
        r_weighted: `‖rf‖_{L²}`
        inv_r: `‖f/r‖_{L²}`
    """

    l2: float
    h1_dot: float
    h11: float
    h1_dot_log: float
    r_weighted: float
    inv_r: float


def norms(f: ComplexField, m: int | None = None) -> Norms:
    m = f.m if m is None else m
    r = f.r
    df = d_r_values(f.values, f.grid)
    l2 = _l2(f.values, f.grid)
    grad = _l2(df, f.grid)
    inv_r = _l2(f.values / r, f.grid)
    h1_dot = float(np.hypot(grad, m * inv_r))
    r_weighted = _l2(r * f.values, f.grid)
    h11 = float(np.sqrt(l2**2 + h1_dot**2 + r_weighted**2))
    h1_dot_log = grad + _l2(f.values / (r * log_minus_bracket(r)), f.grid)
    return Norms(l2=l2, h1_dot=h1_dot, h11=h11, h1_dot_log=h1_dot_log, r_weighted=r_weighted, inv_r=inv_r)


def envelope(f: ComplexField, k: int = 0) -> NDArray[np.float64]:
    """Pointwise `|f|_k = max_{j ≤ k} |(r∂_r)^j f|`."""
    out = np.abs(f.values)
    current = f.values
    for _ in range(k):
        current = f.r * d_r_values(current, f.grid)
        out = np.maximum(out, np.abs(current))
    return out


def envelope_minus1(f: ComplexField) -> NDArray[np.float64]:
    """Pointwise `|f|_{-1} = max(|∂_r f|, |f|/r)`."""
    return np.maximum(np.abs(d_r_values(f.values, f.grid)), np.abs(f.values) / f.r)


# --------------------------------------------------------------------------
# Interpolation and rescaling
# --------------------------------------------------------------------------


def resample_values(f: ComplexField, radii: ArrayLike) -> NDArray[np.complex128]:
    """Cubic spline in `log r`; `c r^{|m|}` below `r_0` and zero beyond `r_max`."""
    radii = np.asarray(radii, dtype=np.float64)
    out = np.zeros(radii.shape, dtype=np.complex128)
    grid = f.grid
    inside = (radii >= grid.r_min) & (radii <= grid.r_max)
    below = radii < grid.r_min
    if np.any(inside):
        s = np.log(radii[inside])
        re = CubicSpline(grid.log_radii, f.values.real)(s)
        im = CubicSpline(grid.log_radii, f.values.imag)(s)
        out[inside] = re + 1j * im
    if np.any(below):
        out[below] = f.values[0] * (radii[below] / grid.r_min) ** abs(f.m)
    return out


def resample(f: ComplexField, grid: RadialGrid) -> ComplexField:
    if grid is f.grid:
        return f
    return ComplexField(grid, resample_values(f, grid.radii), f.m)


def rescale(f: ComplexField, lam: float, gamma: float = 0.0, grid: RadialGrid | None = None) -> ComplexField:
    """`f_{λ,γ}(r) = λ^{-1} e^{iγ} f(r/λ)` sampled on `grid` (default: the field's grid)."""
    grid = f.grid if grid is None else grid
    values = resample_values(f, grid.radii / lam)
    return ComplexField(grid, np.exp(1j * gamma) * values / lam, f.m)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def field_to_csv(f: ComplexField) -> str:
    buf = io.StringIO()
    buf.write(f"# m={f.m} n={f.grid.n} r_max={f.grid.r_max:g}\n")
    buf.write("r,re,im\n")
    table = np.column_stack([f.r, f.values.real, f.values.imag])
    np.savetxt(buf, table, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def field_from_csv(text: str, kind: SpacingKind = "log") -> ComplexField:
    lines = text.splitlines()
    header = dict(item.split("=") for item in lines[0].lstrip("# ").split())
    table = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
    grid = RadialGrid(table[:, 0], kind)
    return ComplexField(grid, table[:, 1] + 1j * table[:, 2], int(header["m"]))
