"""Euclidean embeddings of directed graphs.

Translational, distance and similarity embeddings: constructions with
explicit robustness guarantees, exact verifiers, conversions, random
projection and Hamming-cube compression, and robustness maximization.
"""
from .compression import HammingEmbedding, hamming_embed, jl_project, jl_target_dim
from .constructions import (
    FMEmbedding,
    dag_translational,
    distance_to_similarity,
    fm_embed,
    similarity_to_distance,
    similarity_to_spherical_distance,
    svd_construct,
)
from .embeddings import (
    DiameterStats,
    DistanceEmbedding,
    RobustnessResult,
    SimilarityEmbedding,
    TranslationalEmbedding,
    diameter_stats,
    measure_distance_robustness,
    measure_similarity_robustness,
    translational_obstruction,
    uniformize_thresholds,
    verify_distance,
    verify_similarity,
    verify_translational,
)
from .graph import (
    DiGraph,
    SignSet,
    Spectrum,
    generate,
    km_distance_graph,
    km_similarity_graph,
    read_edgelist,
    realizable_sign_set,
    spectrum,
    write_edgelist,
)
from .optimize import (
    SolveResult,
    SolverConfig,
    Status,
    fit_translational,
    max_distance_robustness,
    max_similarity_robustness,
    oracle_robustness_tiny,
)

__version__ = "0.1.0"
