"""Strang-split Crank–Nicolson integration of the radial CSS and the blow-up tracking experiment."""

import logging
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csc_array, identity
from scipy.sparse.linalg import SuperLU, splu

from csslab.gauge import Variant, energy, mass, potential, second_moment, virial_rates
from csslab.modulation import (
    DecompositionError,
    DecompositionResult,
    ModState,
    RefinedParams,
    closed_form,
    decompose,
    energy_functional,
    initial_data,
    refined_params,
    renormalized_grid,
)
from csslab.radial import ComplexField, RadialGrid, laplacian_matrix, norms
from csslab.radiation import RadiationSpec, z_full
from csslab.soliton import build_ortho_profiles, solve_rho

logger = logging.getLogger(__name__)


class SolverBreakdown(Exception):
    """Raised when the solution becomes non-finite or the linear solve fails.

    Args:
        message: Error message
        t: Time of the failure
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class BudgetExceeded(Exception):
    """Raised when mass or energy drift leaves its declared budget.

    Args:
        message: Error message
        report: Conservation report at the time of the violation
    """

    def __init__(self, message: str, report: "ConservationReport"):
        super().__init__(message)
        self.report = report


@dataclass
class EvolverConfig:
    """Time-stepping parameters.

    Args:
        dt_max: Largest time step
        c_cfl: Step factor in `dt = min(dt_max, c_cfl·λ²)`
        m: Equivariance index
        variant: Gauge of the temporal potential
        sponge: Peak damping rate of the absorbing layer (0 disables it)
        sponge_width: Fraction of the domain covered by the absorbing layer
        monitor_stride: Steps between diagnostics rows
        mass_budget: Allowed relative mass drift per unit time
        energy_budget: Allowed energy drift per unit time, relative to the kinetic scale
        check_budget: Abort with [`BudgetExceeded`][csslab.evolver.BudgetExceeded] at a monitor row
            whose drift leaves its budget
    """

    dt_max: float = 1e-4
    c_cfl: float = 0.1
    m: int = 0
    variant: Variant = "standard"
    sponge: float = 20.0
    sponge_width: float = 0.1
    monitor_stride: int = 200
    mass_budget: float = 1e-8
    energy_budget: float = 1e-6
    check_budget: bool = True


@dataclass
class DiagnosticsRow:
    t: float
    mass: float
    energy: float
    moment: float
    moment_rate: float


@dataclass
class SimulationState:
    """A running simulation.

    Args:
        t: Current time
        u: Current profile
        mass0: Mass at the start
        energy0: Energy at the start
        kinetic0: `‖u‖²_{Ḣ¹}` at the start
        t0: Start time
        m: Equivariance index the energies are taken at
        absorbed: Mass removed by the absorbing layer
        steps: Steps taken
        rows: Diagnostics rows
    """

    t: float
    u: ComplexField
    mass0: float
    energy0: float
    kinetic0: float
    t0: float
    m: int = 0
    absorbed: float = 0.0
    steps: int = 0
    rows: list[DiagnosticsRow] = field(default_factory=list)

    @classmethod
    def start(cls, u: ComplexField, t: float = 0.0, m: int | None = None) -> "SimulationState":
        m = u.m if m is None else m
        return cls(t=t, u=u, mass0=mass(u), energy0=energy(u, m), kinetic0=norms(u, m).h1_dot**2, t0=t, m=m)


# --------------------------------------------------------------------------
# One step
# --------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _cn_factors(grid: RadialGrid, m: int, dt: float) -> tuple[SuperLU, csc_array]:
    lap = laplacian_matrix(grid, m)
    eye = identity(grid.n, dtype=np.complex128, format="csc")
    implicit = csc_array(eye - 0.5j * dt * lap)
    explicit = csc_array(eye + 0.5j * dt * lap)
    return splu(implicit), explicit


def sponge_profile(grid: RadialGrid, strength: float, width: float = 0.1) -> np.ndarray:
    """Quadratic damping rate supported in the outer `width` fraction of the domain."""
    start = (1.0 - width) * grid.r_max
    x = np.clip((grid.radii - start) / (grid.r_max - start), 0.0, 1.0)
    return strength * x**2


def phase_step(u: ComplexField, dt: float, m: int | None = None, variant: Variant = "standard") -> ComplexField:
    """Exact flow of `i∂_t u = V_u u` over `dt`; `V_u` depends on `|u|` only."""
    return u * np.exp(-1j * dt * potential(u, m, variant))


def linear_step(u: ComplexField, dt: float, m: int | None = None) -> ComplexField:
    """Crank–Nicolson step of `i∂_t u + Δ^{(m)}u = 0`."""
    m = u.m if m is None else m
    lu, explicit = _cn_factors(u.grid, m, dt)
    return u.with_values(lu.solve(explicit @ u.values))


def step(
    u: ComplexField,
    dt: float,
    m: int | None = None,
    variant: Variant = "standard",
    damping: np.ndarray | None = None,
) -> ComplexField:
    """Strang splitting: half phase step, Crank–Nicolson step, half phase step.

    Negative `dt` marches backward through the conjugation symmetry of the scheme.

    Raises:
        SolverBreakdown: If the result is not finite
    """
    if dt < 0:
        return step(u.conj(), -dt, m, variant, damping).conj()
    m = u.m if m is None else m
    out = phase_step(u, 0.5 * dt, m, variant)
    out = linear_step(out, dt, m)
    out = phase_step(out, 0.5 * dt, m, variant)
    if damping is not None:
        out = out * np.exp(-damping * dt)
    if not np.all(np.isfinite(out.values)):
        raise SolverBreakdown("non-finite values after step", float("nan"))
    return out


# --------------------------------------------------------------------------
# Marching
# --------------------------------------------------------------------------


def choose_dt(config: EvolverConfig, lam_est: float | None, grid: RadialGrid | None = None) -> float:
    """`min(dt_max, c_cfl·λ², c_cfl·Δr²)` rounded down to `dt_max·2^{−k}` so factorizations are reused.

    The spacing term applies to uniform grids. A log grid is uniform in `log r` and resolves
    the core at every scale, which leaves `λ²` as the binding term.
    """
    target = config.dt_max
    if lam_est is not None:
        target = min(target, config.c_cfl * lam_est**2)
    if grid is not None and grid.kind == "uniform":
        target = min(target, config.c_cfl * grid.step**2)
    k = int(np.ceil(np.log2(config.dt_max / target) - 1e-12))
    return config.dt_max * 2.0 ** (-max(k, 0))


@dataclass
class ConservationReport:
    """Drift of the conserved quantities and the virial mismatch.

    Args:
        elapsed: Time elapsed
        mass_drift: `|M + absorbed − M₀|/M₀` per unit time
        energy_drift: `|E − E₀|` per unit time, relative to `max(|E₀|, ‖u₀‖²_{Ḣ¹}, 1)`
        virial_mismatch: Relative gap between the centered difference of `∫r²|u|²` and `4∫Im(ū r∂_r u)`
        absorbed_fraction: Mass fraction removed by the absorbing layer
    """

    elapsed: float
    mass_drift: float
    energy_drift: float
    virial_mismatch: float | None
    absorbed_fraction: float


def _row(state: SimulationState, m: int) -> DiagnosticsRow:
    rate, _ = virial_rates(state.u, m)
    return DiagnosticsRow(
        t=state.t,
        mass=mass(state.u),
        energy=energy(state.u, m),
        moment=second_moment(state.u),
        moment_rate=rate,
    )


def conservation_report(state: SimulationState, energy_scale: float | None = None) -> ConservationReport:
    elapsed = abs(state.t - state.t0)
    per_time = 1.0 / elapsed if elapsed > 0 else 0.0
    current_mass = mass(state.u)
    scale = energy_scale or max(abs(state.energy0), state.kinetic0, 1.0)

    mismatch = None
    rows = state.rows
    if len(rows) >= 3:
        gaps, peak = [], max(abs(r.moment_rate) for r in rows)
        for prev, mid, nxt in zip(rows, rows[1:], rows[2:]):
            # three-point derivative, exact for quadratics on uneven spacing
            h0, h1 = mid.t - prev.t, nxt.t - mid.t
            fd = (
                -prev.moment * h1 / (h0 * (h0 + h1))
                + mid.moment * (h1 - h0) / (h0 * h1)
                + nxt.moment * h0 / (h1 * (h0 + h1))
            )
            gaps.append(abs(fd - mid.moment_rate))
        mismatch = max(gaps) / peak if peak > 0 else 0.0

    return ConservationReport(
        elapsed=elapsed,
        mass_drift=abs(current_mass + state.absorbed - state.mass0) / state.mass0 * per_time,
        energy_drift=abs(energy(state.u, state.m) - state.energy0) / scale * per_time,
        virial_mismatch=mismatch,
        absorbed_fraction=state.absorbed / state.mass0,
    )


Callback = Callable[[SimulationState], None]


def evolve(
    state: SimulationState,
    t_end: float,
    config: EvolverConfig,
    callback: Callback | None = None,
    scale: Callable[[float], float] | None = None,
) -> SimulationState:
    """March `state` to `t_end` in the fixed frame.

    A diagnostics row is appended every `monitor_stride` steps and at `t_end`, and
    `callback` runs after each row. `scale(t)` estimates `λ` for the step rule.

    Raises:
        SolverBreakdown: If a step produces non-finite values
        BudgetExceeded: If `config.check_budget` and a drift leaves its budget
    """
    direction = 1.0 if t_end >= state.t else -1.0
    damping = sponge_profile(state.u.grid, config.sponge, config.sponge_width) if config.sponge > 0 else None
    tol = 1e-15 * max(1.0, abs(t_end))
    if not state.rows:
        state.rows.append(_row(state, config.m))

    while direction * (t_end - state.t) > tol:
        dt = min(choose_dt(config, scale(state.t) if scale else None, state.u.grid), direction * (t_end - state.t))
        before = mass(state.u) if damping is not None else 0.0
        try:
            state.u = step(state.u, direction * dt, config.m, config.variant, damping)
        except SolverBreakdown as err:
            raise SolverBreakdown(str(err), state.t) from err
        if damping is not None:
            state.absorbed += before - mass(state.u)
        state.t += direction * dt
        state.steps += 1

        if state.steps % config.monitor_stride == 0 or direction * (t_end - state.t) <= tol:
            state.rows.append(_row(state, config.m))
            if callback is not None:
                callback(state)
            if config.check_budget:
                report = conservation_report(state)
                if report.mass_drift > config.mass_budget or report.energy_drift > config.energy_budget:
                    raise BudgetExceeded(f"drift budget exceeded at t={state.t:.6g}", report)
            logger.info(f"t={state.t:.6g} after {state.steps} steps (dt={dt:.3e})")
    return state


# --------------------------------------------------------------------------
# Blow-up experiment
# --------------------------------------------------------------------------

TRAJECTORY_COLUMNS = (
    "t",
    "lambda",
    "gamma",
    "b",
    "eta",
    "B0",
    "zeta_re",
    "zeta_im",
    "E_cal",
    "P",
    "mass",
    "energy",
    "eps_l2",
    "eps_h1",
    "lambda_ratio",
    "b_ratio",
    "eps_band",
)


@dataclass
class BlowupResult:
    """Trajectory of the blow-up experiment.

    Args:
        rows: One dict per monitor time, keyed by `TRAJECTORY_COLUMNS`
        terminated: Why the run stopped early, if it did
        report: Conservation report at the end
        manifest: Configuration and budgets of the run
    """

    rows: list[dict]
    terminated: str | None
    report: ConservationReport
    manifest: dict

    @property
    def lambda_band(self) -> bool:
        return bool(self.rows) and all(0.5 <= row["lambda_ratio"] <= 1.5 for row in self.rows)

    @property
    def eps_band(self) -> bool:
        return bool(self.rows) and all(row["eps_l2"] <= row["eps_band"] for row in self.rows)


def manifest(config: EvolverConfig, grid: RadialGrid, **extra) -> dict:
    return {"solver": asdict(config), "grid": grid.describe(), **extra}


def trajectory_row(spec: RadiationSpec, state: SimulationState, dec: DecompositionResult, ref: RefinedParams) -> dict:
    exact = closed_form(spec.q, spec.nu, state.t)
    b_exact = abs(exact.b_c)
    current = ModState(t=state.t, lam=dec.lam, gamma=dec.gamma)
    return {
        "t": state.t,
        "lambda": dec.lam,
        "gamma": dec.gamma,
        "b": ref.b,
        "eta": ref.eta,
        "B0": ref.B0,
        "zeta_re": ref.zeta.real,
        "zeta_im": ref.zeta.imag,
        "E_cal": energy_functional(spec, current, dec),
        "P": ref.P_surrogate,
        "mass": state.rows[-1].mass,
        "energy": state.rows[-1].energy,
        "eps_l2": dec.eps_l2,
        "eps_h1": dec.eps_h1,
        "lambda_ratio": dec.lam / exact.lam,
        "b_ratio": ref.b / exact.b,
        "eps_band": float(np.sqrt(b_exact) * abs(np.log(b_exact))),
    }


def blowup_experiment(
    spec: RadiationSpec,
    tau: float,
    window: float,
    grid: RadialGrid,
    config: EvolverConfig,
    monitors: int = 16,
    y_points: int | None = None,
    avg: tuple[float, float] = (0.2, 0.1),
) -> BlowupResult:
    """Evolve the prescribed data from `τ` to `τ + window`, decomposing at `monitors + 1` equispaced times.

    The step rule follows the closed-form scale `λ_{q,ν}(t)`. A decomposition failure or a
    drift leaving its budget ends the run with a partial trajectory.
    """
    if not 0 < window < abs(tau):
        raise ValueError("window must lie in (0, |τ|)")
    end_state = closed_form(spec.q, spec.nu, tau + window)
    y_grid = renormalized_grid(grid, end_state.lam, end_state.B0, y_points)
    rho = solve_rho(0, y_grid)
    ortho = build_ortho_profiles(y_grid, rho)
    data = initial_data(spec, tau, grid, rho)

    state = SimulationState.start(data.u, t=tau, m=config.m)
    state.rows.append(_row(state, config.m))
    guess = ModState(t=tau, lam=data.state.lam, gamma=data.state.gamma)
    rows: list[dict] = []
    terminated = None

    def scale(t: float) -> float:
        return closed_form(spec.q, spec.nu, t).lam

    for k, t_k in enumerate(np.linspace(tau, tau + window, monitors + 1)):
        try:
            if k > 0:
                evolve(state, float(t_k), config, scale=scale)
            dec = decompose(state.u, z_full(spec, state.t, grid), ortho, guess)
        except (BudgetExceeded, DecompositionError) as err:
            terminated = f"{type(err).__name__} at t={state.t:.6g}: {err}"
            logger.warning(terminated)
            break
        guess = ModState(t=state.t, lam=dec.lam, gamma=dec.gamma)
        rows.append(trajectory_row(spec, state, dec, refined_params(dec, state.t, rho, *avg)))

    report = conservation_report(state)
    meta = manifest(
        config,
        grid,
        spec={"q": [spec.q.real, spec.q.imag], "nu": [spec.nu.real, spec.nu.imag]},
        tau=tau,
        window=window,
        monitors=monitors,
        renormalized_grid=y_grid.describe(),
        absorbed_fraction=report.absorbed_fraction,
    )
    return BlowupResult(rows=rows, terminated=terminated, report=report, manifest=meta)
