"""Necessary conditions for perfect LOCC discrimination of orthogonal bipartite states."""

__version__ = "0.1.0"

from .bounds import (
    Analysis,
    AnalysisConfig,
    BoundReport,
    FeasibilityReport,
    analyze,
    bound_candidates,
    bound_general_partial,
    bound_optimized_mixed,
    bound_pure,
    bound_support_max,
    d_ppt_estimate,
    ppt_povm_feasibility,
)
from .ensembles import Ensemble, catalog, parse, serialize
from .exceptions import SolverError, ValidationError
from .measures import global_robustness_ppt, mixed_measures, pure_measures
from .qla import BipartiteDims, DensityMatrix, PureState, Subspace, partial_trace, partial_transpose, schmidt_decompose
from .subspaces import is_product_spanned, max_robustness_in_subspace, min_geometric_in_subspace
