from csslab.config import ConfigError, RunConfig, load_config
from csslab.evolver import BlowupResult, EvolverConfig, SimulationState, blowup_experiment, evolve
from csslab.modulation import ModState, closed_form, decompose, initial_data, mod_ode_integrate
from csslab.radial import ComplexField, RadialGrid
from csslab.radiation import RadiationSpec, psi_z, u_star, z_full
from csslab.soliton import build_ortho_profiles, kernel_report, solve_rho, vortex
from csslab.specfun import connection, gamma_complex, kummer_m
from csslab.utils import arun

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "BlowupResult",
    "EvolverConfig",
    "SimulationState",
    "blowup_experiment",
    "evolve",
    "ModState",
    "closed_form",
    "decompose",
    "initial_data",
    "mod_ode_integrate",
    "ComplexField",
    "RadialGrid",
    "RadiationSpec",
    "psi_z",
    "u_star",
    "z_full",
    "build_ortho_profiles",
    "kernel_report",
    "solve_rho",
    "vortex",
    "connection",
    "gamma_complex",
    "kummer_m",
    "arun",
]
