"""Finite-horizon checks of the impossibility and characterization results."""

from .bounds import (
    BoundPair,
    DominanceReport,
    Objective,
    PartialSumReport,
    RatioBoundsReport,
    bound_pair,
    dominance_test,
    objective_bound,
    partial_sum_check,
    ratio_bounds_check,
)
from .elimination import (
    EliminationSystem,
    ImpossibilityReport,
    ReducedSystem,
    WtaStructureReport,
    build_system,
    rref,
    verify_impossibility,
    verify_wta_structure,
)
from .region import (
    RegionGrid,
    RegionPoint,
    RegionVerdict,
    certify_suite,
    in_region,
    region_membership,
    region_mechanism,
    region_scan,
)

__all__ = [
    "BoundPair",
    "DominanceReport",
    "EliminationSystem",
    "ImpossibilityReport",
    "Objective",
    "PartialSumReport",
    "RatioBoundsReport",
    "ReducedSystem",
    "RegionGrid",
    "RegionPoint",
    "RegionVerdict",
    "WtaStructureReport",
    "bound_pair",
    "build_system",
    "certify_suite",
    "dominance_test",
    "in_region",
    "objective_bound",
    "partial_sum_check",
    "ratio_bounds_check",
    "region_membership",
    "region_mechanism",
    "region_scan",
    "rref",
    "verify_impossibility",
    "verify_wta_structure",
]
