"""Interactive clustering-analysis engine.

Iterative clustering and 2-D projection of tabular data, plus spatial
what-if interactions (forward projection, feature sweeps, constrained
backward projection) for reasoning about the reductions.
"""

from .boxqp import ConstraintSet, QPSolution, check_kkt, solve_bp_qp
from .clusters import (
    ClusteringModel,
    ClusterProfile,
    OperationCancelled,
    agglomerative,
    cluster_profile,
    kmeans,
    wcss,
)
from .errors import (
    DataFormatError,
    DegenerateInputError,
    EngineError,
    FilterSyntaxError,
    FilterTypeError,
    InsufficientDataError,
    ParameterError,
    UnknownFeatureError,
    ValidationError,
)
from .filterlang import And, Comparison, CmpOp, Not, Or, eval_expr, parse, to_string
from .projection import (
    Embedding,
    ProjectionModel,
    fit_cmds,
    fit_pca,
    fit_pca_embedding,
    pairwise_distances,
)
from .stats import (
    AnovaResult,
    CorrelationEntry,
    anova_oneway,
    corr_pairs,
    f_cdf,
    point_stats,
    regularized_incomplete_beta,
)
from .table import (
    DataTable,
    FeatureMeta,
    TableView,
    apply_filter,
    export_csv,
    keyword_filter,
    load_csv,
    normalize,
)
from .whatif import (
    Proline,
    backward_project_constrained,
    backward_project_unconstrained,
    forward_project,
    proline,
    proline_all,
)

__version__ = "0.1.0"

__all__ = [
    "AnovaResult",
    "And",
    "ClusteringModel",
    "ClusterProfile",
    "CmpOp",
    "Comparison",
    "ConstraintSet",
    "CorrelationEntry",
    "DataFormatError",
    "DataTable",
    "DegenerateInputError",
    "Embedding",
    "EngineError",
    "FeatureMeta",
    "FilterSyntaxError",
    "FilterTypeError",
    "InsufficientDataError",
    "Not",
    "OperationCancelled",
    "Or",
    "ParameterError",
    "ProjectionModel",
    "Proline",
    "QPSolution",
    "TableView",
    "UnknownFeatureError",
    "ValidationError",
    "agglomerative",
    "anova_oneway",
    "apply_filter",
    "backward_project_constrained",
    "backward_project_unconstrained",
    "check_kkt",
    "cluster_profile",
    "corr_pairs",
    "eval_expr",
    "export_csv",
    "f_cdf",
    "fit_cmds",
    "fit_pca",
    "fit_pca_embedding",
    "forward_project",
    "keyword_filter",
    "kmeans",
    "load_csv",
    "normalize",
    "pairwise_distances",
    "parse",
    "point_stats",
    "proline",
    "proline_all",
    "regularized_incomplete_beta",
    "solve_bp_qp",
    "to_string",
    "wcss",
]
