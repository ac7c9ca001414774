"""Symmetry-forced rigidity of frameworks on the sphere, cylinder and cone."""

from .gaingraph import CoverGraph, GainGraph, GainGraphError, cover, is_balanced, local_group, quotient, switch
from .groups import GroupSpec, SymmetryGroup, UnsupportedPair, make_group, symmetric_type, symmetric_type_numeric
from .harness import Experiment, Verdict, cover_equivalence_test, cross_validate, paper_example_suite
from .moves import Certificate, MoveScript, certify
from .rigidity import (
    RankReport,
    Surface,
    SymmetricFramework,
    generic_rank,
    is_isostatic_numeric,
    orbit_surface_matrix,
    sample_config,
)
from .sparsity import CountSpec, count_for, is_gain_sparse, is_gain_tight, maxwell_necessary

__all__ = [
    "Certificate", "CountSpec", "CoverGraph", "Experiment", "GainGraph", "GainGraphError", "GroupSpec",
    "MoveScript", "RankReport", "Surface", "SymmetricFramework", "SymmetryGroup", "UnsupportedPair",
    "Verdict", "certify", "count_for", "cover", "cover_equivalence_test", "cross_validate",
    "generic_rank", "is_balanced", "is_gain_sparse", "is_gain_tight", "is_isostatic_numeric",
    "local_group", "make_group", "maxwell_necessary", "orbit_surface_matrix", "paper_example_suite",
    "quotient", "sample_config", "switch", "symmetric_type", "symmetric_type_numeric",
]
