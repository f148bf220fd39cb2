"""Feynman-Kac functionals with critical singular potentials: oracles, samplers and estimators."""
from .confinement import confine_prob, confine_prob_mc, confined_mass, keylem_bound
from .errors import ConfigError, DomainError, NumericError, SlowConvergenceError
from .estimate import MCEstimate
from .model import ExperimentGeometry, InitialDatum, PathGrid, PotentialSpec
from .rng import RngStream
from .specfun import bessel_j_zero, bessel_j_zeros

__all__ = [
    "confine_prob", "confine_prob_mc", "confined_mass", "keylem_bound",
    "ConfigError", "DomainError", "NumericError", "SlowConvergenceError",
    "MCEstimate", "ExperimentGeometry", "InitialDatum", "PathGrid", "PotentialSpec",
    "RngStream", "bessel_j_zero", "bessel_j_zeros",
]
__version__ = "0.1.0"
