"""Solver, verifier and property checks for finite games and abstract
economies with private information."""

from .correspondence import Correspondence, MetricGrid, glue, glue_modulus, lower_inverse, upper_inverse
from .dsl import CorrespondenceSpec, parse, print_canonical
from .economy import EconomyInstance, find_equilibrium, is_equilibrium, phi, switch_F
from .game import PrivateInfoGame, expected_payoff, find_nash, is_nash
from .instance import load, save
from .measure import Distribution, FiniteProbSpace, ProductSpace, pushforward, refine
from .selection import convexification_gap, distribution_set, enumerate_selections, purify

__all__ = [
    "Correspondence", "CorrespondenceSpec", "Distribution", "EconomyInstance", "FiniteProbSpace", "MetricGrid",
    "PrivateInfoGame", "ProductSpace", "convexification_gap", "distribution_set", "enumerate_selections",
    "expected_payoff", "find_equilibrium", "find_nash", "glue", "glue_modulus", "is_equilibrium", "is_nash",
    "load", "lower_inverse", "parse", "phi", "print_canonical", "purify", "pushforward", "refine", "save",
    "switch_F", "upper_inverse",
]
