"""Hedgehog skyrmions on a three-sphere of radius L."""

from .continuation import BranchPoint, BranchTable, critical_radius, stability_exchange_report, sweep
from .elsolver import ShootingResult, el_residual, endpoint_series, shoot, solve_bvp
from .hessian import SpectrumResult, analytic_lambda, second_variation, spectrum
from .model import (
    ChargeSector,
    Profile,
    QuadratureRule,
    Radius,
    energy,
    gauss_legendre_rule,
    identity_energy,
    identity_profile,
    inner_g,
    reflect_profile,
    topological_charge,
)
from .perturbation import (
    amplitude_from_radius,
    measure_amplitude,
    perturbative_energy,
    perturbative_profile,
    radius_from_amplitude,
)

__all__ = [
    "BranchPoint", "BranchTable", "ChargeSector", "Profile", "QuadratureRule", "Radius",
    "ShootingResult", "SpectrumResult", "amplitude_from_radius", "analytic_lambda",
    "critical_radius", "el_residual", "endpoint_series", "energy", "gauss_legendre_rule",
    "identity_energy", "identity_profile", "inner_g", "measure_amplitude",
    "perturbative_energy", "perturbative_profile", "radius_from_amplitude",
    "reflect_profile", "second_variation", "shoot", "solve_bvp", "spectrum",
    "stability_exchange_report", "sweep", "topological_charge",
]
