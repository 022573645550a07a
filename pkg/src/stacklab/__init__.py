"""Exact construction and verification of relative stackings in free products,
and audits of the spectral-gap inequality on combinatorial admissible surfaces."""

from .actions import (FactorAction, ProductAction, StackingCertificate, check_stability, eval_factor, eval_word,
                      generated_diagonal, trajectory, verify_certificate)
from .plline import Interval, PLHomeo, compose, fixed_sets, make_mover
from .stacker import StackerConfig, build_stacking, solve_simple
from .surfaces import NormalFormSurface, audit, euler_neg
from .words import AlternatingWord, FactorElement, cyclic_reduce, is_proper_power, reduce

__version__ = "0.1.0"
