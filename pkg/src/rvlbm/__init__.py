"""Stability analysis of relative velocity D2Q4 lattice Boltzmann schemes for linear advection."""

from ._backend import name as backend_name
from .eqeq import (
    EquivalentEquation,
    diffusion_matrix,
    dispersion_matrix,
    numeric_dispersion_fit,
    wellposed,
)
from .l2 import StabilityStructure, Verdict, check_structure, find_prestructure
from .lattice import (
    Equilibrium,
    RelativeMode,
    SchemeSpec,
    Variant,
    collision_matrix,
    equilibrium_moments,
    henon_to_rate,
    moment_matrix,
    twist_map,
)
from .linf import LinfCase, linf_oracle, linf_param_domain, linf_region_predicate
from .simulator import init_spot, max_stable_speed, run, run_spot_experiment, step
from .vonneumann import amplification_matrix, max_spectral_radius, stability_region_scan

__all__ = [
    "backend_name",
    "EquivalentEquation", "diffusion_matrix", "dispersion_matrix", "numeric_dispersion_fit",
    "wellposed",
    "StabilityStructure", "Verdict", "check_structure", "find_prestructure",
    "Equilibrium", "RelativeMode", "SchemeSpec", "Variant", "collision_matrix",
    "equilibrium_moments", "henon_to_rate", "moment_matrix", "twist_map",
    "LinfCase", "linf_oracle", "linf_param_domain", "linf_region_predicate",
    "init_spot", "max_stable_speed", "run", "run_spot_experiment", "step",
    "amplification_matrix", "max_spectral_radius", "stability_region_scan",
]
