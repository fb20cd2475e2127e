"""Exact census of polynomial and rational dynamical systems over small
finite fields: enumerate a map family, classify the functional graphs up
to isomorphism, and check the counts against closed-form predictions."""

__version__ = "0.1.0"

from .gfq import FieldSpec, make_field
from .dynmaps import FamilySpec, PolyMap, RationalMap
from .funcgraph import (
    FunctionalGraph,
    analyze,
    are_isomorphic_oracle,
    build_graph,
    canonical_key,
    export_dot,
    relabel,
)
from .census import CensusReport, run_census, single_component_search, fixed_point_census
from .theory import predictions_for_family, verify_report

__all__ = [
    "FieldSpec",
    "make_field",
    "FamilySpec",
    "PolyMap",
    "RationalMap",
    "FunctionalGraph",
    "build_graph",
    "analyze",
    "canonical_key",
    "are_isomorphic_oracle",
    "relabel",
    "export_dot",
    "CensusReport",
    "run_census",
    "single_component_search",
    "fixed_point_census",
    "predictions_for_family",
    "verify_report",
    "__version__",
]
