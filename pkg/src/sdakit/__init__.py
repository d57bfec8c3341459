"""sdakit: sparse semi-supervised discriminant analysis.

Rates large sparse binary datasets with a handful of labeled samples by
solving the SDA spectral pencil with matrix-free Krylov methods: Tanimoto
similarity graphs supply the Laplacian smoother, labeled-mean centering is
folded into every matvec, and a shifted conjugate gradient amortizes an
entire regularization grid into a single Krylov basis.
"""

from .sparse import (
    CenteringVector,
    LabelVector,
    SparseFormatError,
    SparseMatrix,
    build_sparse,
    centered_matvec,
    centered_matvec_transpose,
    labeled_mean,
)
from .graph import (
    GraphError,
    Laplacian,
    SimilarityGraph,
    knn_graph,
    laplacian,
    tanimoto,
    threshold_graph,
)
from .krylov import (
    LinearOperator,
    ShiftGrid,
    ShiftedSolveResult,
    block_cg,
    cg,
    rayleigh_ritz_2x2,
    shifted_cg,
    subspace_iteration,
)
from .sda import (
    RatingVector,
    SdaProblem,
    SolveReport,
    apply_smoother,
    apply_w,
    arrange_labeled_first,
    csr_sda_solve,
    fsda_solve,
    sa_sda_solve,
    solve,
    sr_sda_solve,
)
from .evaluation import (
    CvPlan,
    ExperimentResult,
    auc_roc,
    bench_shifted,
    nested_cv,
    subsample_labels,
)

__version__ = "0.1.0"

__all__ = [
    "CenteringVector", "LabelVector", "SparseFormatError", "SparseMatrix",
    "build_sparse", "centered_matvec", "centered_matvec_transpose", "labeled_mean",
    "GraphError", "Laplacian", "SimilarityGraph", "knn_graph", "laplacian",
    "tanimoto", "threshold_graph",
    "LinearOperator", "ShiftGrid", "ShiftedSolveResult", "block_cg", "cg",
    "rayleigh_ritz_2x2", "shifted_cg", "subspace_iteration",
    "RatingVector", "SdaProblem", "SolveReport", "apply_smoother", "apply_w",
    "arrange_labeled_first", "csr_sda_solve", "fsda_solve", "sa_sda_solve",
    "solve", "sr_sda_solve",
    "CvPlan", "ExperimentResult", "auc_roc", "bench_shifted", "nested_cv",
    "subsample_labels",
]
