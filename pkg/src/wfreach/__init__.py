"""Reachability and coverability analysis for sound acyclic free-choice
workflow nets, in quadratic time via the concurrency relation, admissibility,
post-dominance frontiers, and diverging points."""

from .netcore import Marking, PetriNet, WorkflowNet
from .formats import (
    ColorRole,
    StructureViolationError,
    export_dot,
    format_marking,
    format_native,
    load_net,
    parse_marking,
    parse_native,
    parse_pnml,
)
from .structure import validate_structure, to_simple_free_choice
from .concurrency import check_admissibility, determine_concurrency
from .postdom import compute_postdom
from .diverge import compute_diverging_points
from .decide import (
    AnalysisReport,
    NetAnalyzer,
    Witness,
    assign_roles,
    build_witness,
    is_reachable,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "ColorRole",
    "Marking",
    "NetAnalyzer",
    "PetriNet",
    "StructureViolationError",
    "Witness",
    "WorkflowNet",
    "assign_roles",
    "build_witness",
    "check_admissibility",
    "compute_diverging_points",
    "compute_postdom",
    "determine_concurrency",
    "export_dot",
    "format_marking",
    "format_native",
    "is_reachable",
    "load_net",
    "parse_marking",
    "parse_native",
    "parse_pnml",
    "to_simple_free_choice",
    "validate_structure",
    "__version__",
]
