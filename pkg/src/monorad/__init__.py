"""Monodromy groups of algebraic functions and their radical towers."""

__version__ = "0.1.0"

from .errors import (AmbiguousMatching, CapExceeded, EigenCheckFailed, MonoradError,
                     NearBranchLocus, NoFit, NonStabilized, NumericFailure, ParseError,
                     PreconditionError, StepCollapse, VerificationFailed)
from .groups import (CharacterTable, DerivedSeries, Perm, PermGroup, RootOfUnity,
                     derived_series, derived_subgroup, generate_elements, is_solvable,
                     orbits, quotient_characters)
from .monodromy import (LocalReport, MonodromyRep, SliceLine, branch_points, choose_slice,
                        local_monodromy, monodromy_group, ramified_germs, track_fiber)
from .polyalg import (AlgebraicFamily, ExactScalar, MultiPoly, branch_poly, eval_coeffs,
                      parse_family, parse_poly, resultant_y)
from .radicals import (RadicalExpr, SampleGrid, Sym, UnsolvabilityCertificate, act,
                       build_grid, is_invariant, radical_tower, rational_reconstruct,
                       resolvent_split, unsolvability_certificate)
from .roots import Fiber, all_roots, fiber_at

__all__ = [
    "AmbiguousMatching", "CapExceeded", "EigenCheckFailed", "MonoradError",
    "NearBranchLocus", "NoFit", "NonStabilized", "NumericFailure", "ParseError",
    "PreconditionError", "StepCollapse", "VerificationFailed", "CharacterTable",
    "DerivedSeries", "Perm", "PermGroup", "RootOfUnity", "derived_series",
    "derived_subgroup", "generate_elements", "is_solvable", "orbits",
    "quotient_characters", "LocalReport", "MonodromyRep", "SliceLine", "branch_points",
    "choose_slice", "local_monodromy", "monodromy_group", "ramified_germs",
    "track_fiber", "AlgebraicFamily", "ExactScalar", "MultiPoly", "branch_poly",
    "eval_coeffs", "parse_family", "parse_poly", "resultant_y", "RadicalExpr",
    "SampleGrid", "Sym", "UnsolvabilityCertificate", "act", "build_grid",
    "is_invariant", "radical_tower", "rational_reconstruct", "resolvent_split",
    "unsolvability_certificate", "Fiber", "all_roots", "fiber_at",
]
