"""Correlation coefficients, uncertainty product ratios and the generalized
Robertson-Schroedinger family of inequalities."""

from .bipartite import (
    SchmidtForm,
    kmax_squared,
    kmax_squared_forms,
    optimal_partner_observable,
    projector_residue,
    schmidt_decompose,
)
from .commutant import (
    SearchResult,
    brute_force_cc_max,
    maximize_cc_in_commutant,
    project_to_effective_commutant,
    tightened_bound,
)
from .errors import UrlabError
from .inequalities import (
    CHECKERS,
    InequalityReport,
    check_generalized_cc_bound,
    check_geometric,
    check_master_inequality,
    check_robertson_schroedinger,
    check_symmetric_sum,
    check_synge,
    check_three_observable,
    check_trifonov,
    run_suite,
    transform_state,
)
from .kernels import BACKEND
from .measures import (
    OverlapGeometry,
    UprValue,
    correlation_coefficient,
    effective_compatibility,
    overlap_geometry,
    upr,
)
from .qcore import (
    MomentSet,
    Observable,
    QuantumState,
    make_mixed_state,
    make_observable,
    make_pure_state,
    moments,
    purify,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CHECKERS",
    "InequalityReport",
    "MomentSet",
    "Observable",
    "OverlapGeometry",
    "QuantumState",
    "SchmidtForm",
    "SearchResult",
    "UprValue",
    "UrlabError",
    "brute_force_cc_max",
    "check_generalized_cc_bound",
    "check_geometric",
    "check_master_inequality",
    "check_robertson_schroedinger",
    "check_symmetric_sum",
    "check_synge",
    "check_three_observable",
    "check_trifonov",
    "correlation_coefficient",
    "effective_compatibility",
    "kmax_squared",
    "kmax_squared_forms",
    "make_mixed_state",
    "make_observable",
    "make_pure_state",
    "maximize_cc_in_commutant",
    "moments",
    "optimal_partner_observable",
    "overlap_geometry",
    "project_to_effective_commutant",
    "projector_residue",
    "purify",
    "run_suite",
    "schmidt_decompose",
    "tightened_bound",
    "transform_state",
    "upr",
]
