"""Stokes data of mild linear difference systems at infinity."""
from .diffmod import DiffSystem, FormalBlock, FormalDatum, check_mild, formal_datum, graded_module
from .errors import StokesDiffError
from .exponents import Arc, Exponent, GrowthClass, growth_class, stokes_directions
from .parser import parse_exponent, parse_formal, parse_system, print_system, read_system
from .sectorial import QuadratureParams, RaySamples, SolveParams, classify_growth, flat_sections, lambda_op
from .series import MatrixSeries, PuiseuxSeries
from .stokes import cocycle_from_solutions, default_covering, identity_cocycle, rh_assemble

__version__ = "0.1.0"
