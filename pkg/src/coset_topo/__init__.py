"""Coset posets of finite groups: exact homology, Möbius invariants and simple connectivity."""

from .errors import (BudgetExceeded, CosetTopoError, GroupAxiomError, GroupConstructionError,
                     InvariantViolation, PruningRefused, TruncationError)
from .grp import FiniteGroup, from_recipe
from .homology import reduced_homology
from .lattice import enumerate_subgroups, mobius, prob_zeta
from .pi1 import certify_simple_connectivity
from .topo import coset_poset, minimal_cover_skeleton, order_complex

__version__ = "0.1.0"
