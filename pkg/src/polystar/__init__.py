"""Equilibria of self-gravitating polytropic stars.

Shooting solver, direct energy minimiser, radial potentials, energy
identities and the mass-scaling laws that relate stars of different mass.
"""

from ._validation import (
    BracketError,
    ConsistencyError,
    DomainError,
    NonConvergenceError,
    NumericError,
    UnboundedSupportError,
)
from .energetics import EnergyReport, hls_ratio, virial_report
from .eos import EquationOfState, check_assumptions
from .radial_field import (
    RadialDensity,
    mutual_energy_quadrature,
    potential_profile,
    shell_density,
    two_sphere_energy,
    uniform_ball,
)
from .scaling import predicted_multiplier, rescale_solution, scale_exponents
from .shooting import StellarSolution, beta_of_mass, el_residual, solve_star, solve_star_for_mass
from .varmin import fixed_point_minimize

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConsistencyError",
    "DomainError",
    "EnergyReport",
    "EquationOfState",
    "NonConvergenceError",
    "NumericError",
    "RadialDensity",
    "StellarSolution",
    "UnboundedSupportError",
    "beta_of_mass",
    "check_assumptions",
    "el_residual",
    "fixed_point_minimize",
    "hls_ratio",
    "mutual_energy_quadrature",
    "potential_profile",
    "predicted_multiplier",
    "rescale_solution",
    "scale_exponents",
    "shell_density",
    "solve_star",
    "solve_star_for_mass",
    "two_sphere_energy",
    "uniform_ball",
    "virial_report",
]
