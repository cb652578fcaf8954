"""Multi-view orthonormal nonnegative graph clustering."""
from ._backend import BACKEND
from .graphs import (
    FeatureMatrix,
    MultiViewGraphSet,
    SimilarityMatrix,
    build_graphs,
    doubly_stochastic,
    gaussian_similarity,
    knn_sparsify,
    laplacian,
    symmetric_normalize,
)
from .labels import accuracy, assign_from_embedding, hungarian, kmeans, pairwise_f1
from .sec import SecConfig, SecModel, predict_out_of_sample, regression_params, sec_graph_term, solve_sec
from .simplex_qp import QpProblem, closed_form_kkt, exact_simplex_qp, project_simplex
from .solver import (
    EmbeddingPair,
    SolverConfig,
    SolverState,
    ViewWeights,
    objective,
    orthogonal_procrustes,
    solve,
    update_alpha,
    update_f,
    update_g,
)

__version__ = "0.1.0"
