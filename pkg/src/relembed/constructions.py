"""Constructive embeddings and conversions between embedding types."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .embeddings import (
    TOL,
    DistanceEmbedding,
    SimilarityEmbedding,
    TranslationalEmbedding,
    measure_distance_robustness,
    measure_similarity_robustness,
)
from .errors import CyclicGraph, InvalidParams, NotRobust, ZeroColumn, ZeroThreshold
from .graph import DiGraph, numerical_rank

# Relative cut for the factorization of M - tJ; tighter than the graph rank
# tolerance so that dropped components cannot flip the sign of any entry.
FACTOR_RTOL = 1e-12
ZERO_COLUMN_RTOL = 1e-12
THRESHOLD_NUDGE = 1e-7


@dataclass(frozen=True, eq=False)
class FMEmbedding:
    """Constant-norm undirected embedding with two possible pairwise distances.

    ``|psi(i)|^2 = Delta``; adjacent pairs sit at squared distance
    ``2 (Delta - 1)`` and non-adjacent pairs at ``2 Delta``.
    """

    psi: np.ndarray
    Delta: float

    @property
    def dim(self) -> int:
        return self.psi.shape[1]


def _robust_enough(measured: float, claimed: float) -> bool:
    return measured >= claimed - TOL * max(1.0, abs(claimed))


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def svd_construct(g: DiGraph) -> tuple[DistanceEmbedding, SimilarityEmbedding]:
    """Unit-sphere embeddings from the SVD of the adjacency matrix.

    Splitting ``A = U S V^T`` as ``(U S^1/2)(V S^1/2)^T`` and normalizing rows
    gives out/in vectors whose dot product is at least ``1/sigma1`` on edges
    and exactly 0 elsewhere. The distance version uses
    ``t = sqrt(2 (1 - 1/sigma1))``; the similarity version uses ``1/sigma1``.
    Both are ``1/sigma1``-robust.

    Nodes without out-edges (in-edges) would get a zero out- (in-) vector;
    they are parked on a dedicated extra axis, one for each side.
    """
    n = g.n
    if n == 0:
        raise InvalidParams("graph has no nodes")
    if not g.edges:
        out = np.zeros((n, 2))
        inn = np.zeros((n, 2))
        out[:, 0] = 1.0
        inn[:, 1] = 1.0
        return DistanceEmbedding(out, inn, 1.0), SimilarityEmbedding(out, inn, 1.0)

    A = g.adjacency()
    U, s, Vt = np.linalg.svd(A)
    k = numerical_rank(s)
    sigma1 = float(s[0])
    if sigma1 < 1.0 - 1e-9:
        raise AssertionError(f"0/1 matrix with an edge has sigma1 >= 1, got {sigma1}")
    root = np.sqrt(s[:k])
    out = U[:, :k] * root
    inn = Vt[:k].T * root

    no_out = g.out_degrees() == 0
    no_in = g.in_degrees() == 0
    extra = int(no_out.any()) + int(no_in.any())
    if extra:
        out = np.hstack([out, np.zeros((n, extra))])
        inn = np.hstack([inn, np.zeros((n, extra))])
        axis = k
        if no_out.any():
            out[no_out] = 0.0
            out[no_out, axis] = 1.0
            axis += 1
        if no_in.any():
            inn[no_in] = 0.0
            inn[no_in, axis] = 1.0
    out = _normalize_rows(out)
    inn = _normalize_rows(inn)

    t = math.sqrt(2.0 * (1.0 - 1.0 / sigma1)) if sigma1 > 1.0 else 0.0
    return DistanceEmbedding(out, inn, t), SimilarityEmbedding(out, inn, 1.0 / sigma1)


def fm_embed(n: int, edges: Iterable) -> FMEmbedding:
    """Incidence-plus-padding embedding of a simple undirected graph.

    One coordinate per edge (1 on both endpoints) and one private coordinate
    per vertex holding ``sqrt(Delta - deg)``, where ``Delta = max(max degree, 1)``.
    """
    pairs = {tuple(sorted(map(int, e))) for e in edges}
    und = sorted(e for e in pairs if len(e) == 2 and e[0] != e[1])
    deg = np.zeros(n, dtype=int)
    for i, j in und:
        deg[i] += 1
        deg[j] += 1
    Delta = float(max(int(deg.max(initial=0)), 1))
    psi = np.zeros((n, len(und) + n))
    for col, (i, j) in enumerate(und):
        psi[i, col] = psi[j, col] = 1.0
    psi[np.arange(n), len(und) + np.arange(n)] = np.sqrt(Delta - deg)
    psi.setflags(write=False)
    return FMEmbedding(psi, Delta)


def dag_translational(g: DiGraph) -> TranslationalEmbedding:
    """Uniform translational embedding of an acyclic graph.

    Node at topological position ``p`` maps to ``(p / (n-1), psi)`` where ``psi``
    is the FM embedding of the undirected skeleton; ``z`` is the first axis and
    ``t = sqrt(2 Delta - 1)``.
    """
    order = g.topological_order()
    if order is None:
        raise CyclicGraph("graph has a directed cycle or self-loop")
    n = g.n
    fm = fm_embed(n, g.undirected_edges())
    step = 1.0 / (n - 1) if n > 1 else 1.0
    pos = np.empty(n)
    pos[order] = np.arange(n) * step
    phi = np.hstack([pos[:, None], fm.psi])
    z = np.zeros(phi.shape[1])
    z[0] = 1.0
    t = math.sqrt(2.0 * fm.Delta - 1.0)
    return TranslationalEmbedding(phi, z, np.full(n, t))


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def _factor_shifted(M: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray] | None:
    K = M - t
    U, s, Vt = np.linalg.svd(K)
    if s.size == 0 or s[0] == 0.0:
        return None
    r = int(np.count_nonzero(s > FACTOR_RTOL * s[0]))
    root = np.sqrt(s[:r])
    out = U[:, :r] * root
    inn = Vt[:r].T * root
    norms = np.concatenate([np.linalg.norm(out, axis=1), np.linalg.norm(inn, axis=1)])
    if norms.min() <= ZERO_COLUMN_RTOL * norms.max():
        return None
    return out, inn


def similarity_to_spherical_distance(g: DiGraph, e: SimilarityEmbedding) -> DistanceEmbedding:
    """Spherical distance embedding of dimension at most ``e.dim + 1``.

    ``M - tJ`` (``M`` the dot-product matrix) is non-negative exactly on
    edges and has rank at most ``d + 1``. Factoring it and normalizing the
    factors gives unit vectors whose dot is >= 0 exactly on edges, i.e.
    squared distance <= 2.
    """
    M = e.dots()
    t = e.threshold
    factors = _factor_shifted(M, t)
    if factors is None:
        # a node whose row/column of M - tJ vanishes; shift t just below it
        factors = _factor_shifted(M, t - THRESHOLD_NUDGE * (1.0 + abs(t)))
    if factors is None:
        raise ZeroColumn("M - tJ has a zero row or column even after perturbing t")
    out, inn = factors
    return DistanceEmbedding(_normalize_rows(out), _normalize_rows(inn), math.sqrt(2.0))


def distance_to_similarity(g: DiGraph, e: DistanceEmbedding, delta: float) -> SimilarityEmbedding:
    """Lift a ``delta``-robust distance embedding onto the unit sphere in one more dimension.

    After scaling to ``t = 1``, with ``Delta = max(B, 1)`` (``B`` the largest
    norm) and ``c = sqrt(delta / (3 Delta^4))``, each vector ``v`` becomes
    ``(c v, 1) / sqrt(1 + c^2 |v|^2)``. Edge dots stay >= ``1 - c^2/2`` and
    the result is ``delta^2 / (18 Delta^4)``-robust.
    """
    if e.per_source:
        raise InvalidParams("uniformize per-source thresholds first")
    if e.threshold <= 0:
        raise ZeroThreshold("cannot rescale a t = 0 embedding to t = 1")
    if delta <= 0:
        raise InvalidParams("delta must be positive")
    rob = measure_distance_robustness(g, e)
    if not rob.valid or not _robust_enough(rob.delta, delta):
        raise NotRobust(f"embedding is not {delta}-robust (measured {rob.delta})")
    unit = e.scaled(1.0 / e.threshold)
    V = np.vstack([unit.phi_out, unit.phi_in])
    Delta = max(float(np.linalg.norm(V, axis=1).max()), 1.0)
    c = math.sqrt(delta / (3.0 * Delta ** 4))

    def lift(X: np.ndarray) -> np.ndarray:
        Y = np.hstack([c * X, np.ones((X.shape[0], 1))])
        return Y / np.sqrt(1.0 + c * c * (X * X).sum(1))[:, None]

    return SimilarityEmbedding(lift(unit.phi_out), lift(unit.phi_in), 1.0 - c * c / 2.0)


def distance_to_similarity_bound(delta: float, Delta: float) -> float:
    return delta * delta / (18.0 * Delta ** 4)


def similarity_to_distance(g: DiGraph, e: SimilarityEmbedding, delta: float) -> DistanceEmbedding:
    """Spherical distance embedding with robustness at least ``delta / 2``.

    Vectors are scaled into the unit ball and completed to unit length along
    two fresh axes, one reserved for left vectors and one for right vectors,
    which leaves every cross dot product unchanged. Dots ``>= t`` become
    squared distances ``<= 2 - 2t``.
    """
    rob = measure_similarity_robustness(g, e)
    if not rob.valid or not _robust_enough(rob.delta, delta):
        raise NotRobust(f"embedding is not {delta}-robust (measured {rob.delta})")
    M = e.max_sq_norm()
    scale = 1.0 / math.sqrt(M) if M > 0 else 1.0
    L = e.phi_L * scale
    R = e.phi_R * scale
    t = min(e.threshold * scale * scale, 1.0)
    n = e.n
    padL = np.sqrt(np.maximum(1.0 - (L * L).sum(1), 0.0))
    padR = np.sqrt(np.maximum(1.0 - (R * R).sum(1), 0.0))
    out = np.hstack([L, padL[:, None], np.zeros((n, 1))])
    inn = np.hstack([R, np.zeros((n, 1)), padR[:, None]])
    return DistanceEmbedding(out, inn, math.sqrt(max(0.0, 2.0 - 2.0 * t)))
