import asyncio
import inspect
import logging
from collections.abc import Awaitable, Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer
from dotenv import load_dotenv

from csslab import checks
from csslab.checks import CommandResult
from csslab.config import ConfigError, RunConfig, load_config, log_level, workers
from csslab.evolver import BudgetExceeded, SolverBreakdown
from csslab.modulation import DecompositionError, ModulationODEError, RegimeError
from csslab.output import json_summary, write_all, write_atomic
from csslab.soliton import DivergenceError, TransversalityError
from csslab.specfun import ConvergenceError, MatchingError, PoleError

logger = logging.getLogger(__name__)

app = typer.Typer(help="Blow-up numerics for the radial self-dual Chern–Simons–Schrödinger equation.")

NUMERICAL_ERRORS = (
    ArithmeticError,
    ValueError,
    np.linalg.LinAlgError,
    PoleError,
    ConvergenceError,
    MatchingError,
    DivergenceError,
    TransversalityError,
    RegimeError,
    ModulationODEError,
    DecompositionError,
    SolverBreakdown,
    BudgetExceeded,
)

ConfigOption = Annotated[
    Optional[Path],
    typer.Option(
        "--config",
        "-c",
        help="Configuration file with 'section.key = value' lines",
        exists=True,
        file_okay=True,
        dir_okay=False,
    ),
]
SetOption = Annotated[
    Optional[list[str]],
    typer.Option("--set", "-s", help="Override one configuration key, e.g. grid.n=2048 (repeatable)"),
]
OutOption = Annotated[
    Optional[Path],
    typer.Option("--out", "-o", help="Output directory (default: out.dir, or CSSLAB_OUT_DIR)"),
]

Work = Callable[[RunConfig], CommandResult | Awaitable[CommandResult]]


@app.callback()
def main(
    level: Annotated[
        Optional[str],
        typer.Option("--log-level", "-l", help="Logging level (default: CSSLAB_LOG_LEVEL or WARNING)"),
    ] = None,
):
    load_dotenv()
    logging.basicConfig(
        level=(level or log_level()).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


async def _execute(work: Work, config: RunConfig) -> CommandResult:
    if n := workers():
        asyncio.get_running_loop().set_default_executor(ThreadPoolExecutor(max_workers=n))
    result = work(config)
    if inspect.isawaitable(result):
        return await result
    return result


async def _write(command: str, config: RunConfig, result: CommandResult, out_dir: Path) -> Path:
    await write_all(out_dir, result.files)
    extra = {"values": result.values} if result.values else None
    summary = json_summary(command, config.summary(), result.check_dicts(), extra)
    return await write_atomic(out_dir / "summary.json", summary)


def run_command(command: str, config_path: Path | None, overrides: list[str] | None, out: Path | None, work: Work):
    try:
        config = load_config(config_path, overrides)
    except ConfigError as err:
        typer.echo(f"Configuration error: {err}", err=True)
        raise typer.Exit(code=2)

    out_dir = (out or config.out.dir) / command
    try:
        result = asyncio.run(_execute(work, config))
    except NUMERICAL_ERRORS as err:
        logger.debug(f"{command} failed", exc_info=True)
        typer.echo(f"{command} failed: {type(err).__name__}: {err}", err=True)
        raise typer.Exit(code=1)

    summary_path = asyncio.run(_write(command, config, result, out_dir))
    passed = len(result.checks) - len(result.failed)
    typer.echo(f"{command}: {passed}/{len(result.checks)} checks passed, see {summary_path}")
    if not result.passed:
        for name in result.failed:
            check = result.checks[name]
            typer.echo(f"FAILED {name}: value={check.value} threshold={check.threshold}", err=True)
        raise typer.Exit(code=1)


@app.command("soliton-check")
def soliton_check(config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None):
    """Vortex identities, charges, the generalized kernel and the orthogonality profiles."""
    run_command("soliton-check", config, overrides, out, checks.soliton_check)


@app.command("specfun-check")
def specfun_check(
    nu: Annotated[
        Optional[list[str]],
        typer.Option("--nu", "-n", help="Exponent ν, e.g. 2 or 1+0.5i (repeatable; default: 1, 2, 3, 1+0.5i, 2-i)"),
    ] = None,
    config: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = None,
):
    """Connection coefficients of the self-similar ODE against their closed forms."""
    try:
        nus = [checks.parse_complex(v) for v in nu] if nu else list(checks.DEFAULT_NUS)
    except ValueError as err:
        typer.echo(str(err), err=True)
        raise typer.Exit(code=2)
    run_command("specfun-check", config, overrides, out, lambda _: checks.specfun_check(nus))


@app.command("radiation-build")
def radiation_build(
    q: Annotated[Optional[str], typer.Option("--q", help="Amplitude q, e.g. 1 or 0.5+0.5i")] = None,
    nu_re: Annotated[Optional[float], typer.Option("--nu-re", help="Real part of ν")] = None,
    nu_im: Annotated[Optional[float], typer.Option("--nu-im", help="Imaginary part of ν")] = None,
    t_ladder: Annotated[
        str,
        typer.Option("--t-ladder", "-t", help="Comma-separated negative times"),
    ] = ",".join(f"{t:g}" for t in checks.DEFAULT_T_LADDER),
    config: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = None,
):
    """Radiation samples, residual norms and data distances along a ladder of times."""
    extra = []
    try:
        if q is not None:
            value = checks.parse_complex(q)
            extra += [f"spec.q_re={value.real!r}", f"spec.q_im={value.imag!r}"]
        ladder = [float(t) for t in t_ladder.split(",") if t.strip()]
    except ValueError as err:
        typer.echo(str(err), err=True)
        raise typer.Exit(code=2)
    if nu_re is not None:
        extra.append(f"spec.nu_re={nu_re!r}")
    if nu_im is not None:
        extra.append(f"spec.nu_im={nu_im!r}")
    run_command(
        "radiation-build",
        config,
        [*extra, *(overrides or [])],
        out,
        lambda cfg: checks.radiation_build(cfg, ladder),
    )


@app.command("mod-ode")
def mod_ode(config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None):
    """Closed-form rates, the modulation system and the interaction leading order."""
    run_command("mod-ode", config, overrides, out, checks.mod_ode)


@app.command("decompose")
def decompose(config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None):
    """Prescribed initial data diagnostics and the decomposition of the data at time.tau."""
    run_command("decompose", config, overrides, out, checks.decompose_check)


@app.command("evolve")
def evolve(config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None):
    """Conservation laws, virial identity and reversibility of the evolver near the vortex."""
    run_command("evolve", config, overrides, out, checks.evolve_check)


@app.command("blowup-verify")
def blowup_verify(
    monitors: Annotated[int, typer.Option("--monitors", "-m", help="Number of monitor intervals", min=1)] = 16,
    config: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = None,
):
    """Evolve the prescribed data over the window and track the bootstrap bands."""
    run_command("blowup-verify", config, overrides, out, lambda cfg: checks.blowup_verify(cfg, monitors))


@app.command("transform")
def transform(config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None):
    """Hankel-type transform of the asymptotic profile and the pseudoconformal transform."""
    run_command("transform", config, overrides, out, checks.transform_check)


if __name__ == "__main__":
    app()
