"""Top-k canonical correlation subspaces of large sparse matrix pairs.

Exact desk-scale solver, orthogonal iteration with pluggable least-squares
solvers, the deflated-gradient solver family, and the supporting kernels,
metrics, and data tooling.
"""

import os as _os

# Honor ITERCCA_THREADS before numpy (and its BLAS) is first imported
# anywhere in the package; explicit user settings of the BLAS variables
# always win over this default.
_threads = _os.environ.get("ITERCCA_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from .cca import (
    CcaResult,
    ConvergenceTrace,
    ExactCcaFactors,
    IterationFailure,
    SingularGramError,
    d_cca,
    exact_cca,
    exact_cca_result,
    final_correlations,
    g_cca,
    iterative_ls_cca,
    l_cca,
    rp_cca,
)
from .datasets import (
    SynthSpec,
    TokenDatasetSpec,
    read_libsvm,
    read_matrix_market,
    synth_correlated,
    tokens_to_indicators,
    write_matrix_market,
)
from .evaluation import (
    RateFit,
    captured_correlation_sum,
    fit_geometric_rate,
    subspace_dist,
)
from .linalg import (
    QrFactors,
    as_sparse,
    gram_diagonal,
    rank_deficient_columns,
    sparse_dense_mul,
    sparse_gram,
    sparse_transpose_dense_mul,
    sparse_work,
    thin_qr,
)
from .ling import LingConfig, LingSolver, build_solver, gd_least_squares, ling_solve
from .rsvd import RangeBasis, randomized_top_singulars

__all__ = [
    "CcaResult",
    "ConvergenceTrace",
    "ExactCcaFactors",
    "IterationFailure",
    "LingConfig",
    "LingSolver",
    "QrFactors",
    "RangeBasis",
    "RateFit",
    "SingularGramError",
    "SynthSpec",
    "TokenDatasetSpec",
    "as_sparse",
    "build_solver",
    "captured_correlation_sum",
    "d_cca",
    "exact_cca",
    "exact_cca_result",
    "final_correlations",
    "fit_geometric_rate",
    "g_cca",
    "gd_least_squares",
    "gram_diagonal",
    "iterative_ls_cca",
    "l_cca",
    "ling_solve",
    "randomized_top_singulars",
    "rank_deficient_columns",
    "read_libsvm",
    "read_matrix_market",
    "rp_cca",
    "sparse_dense_mul",
    "sparse_gram",
    "sparse_transpose_dense_mul",
    "sparse_work",
    "subspace_dist",
    "synth_correlated",
    "thin_qr",
    "tokens_to_indicators",
    "write_matrix_market",
]
