"""Robustness-preserving dimension reduction: Gaussian random projection and
random-halfspace Hamming codes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import make_rng
from .embeddings import (
    TOL,
    DistanceEmbedding,
    SimilarityEmbedding,
    measure_distance_robustness,
    measure_similarity_robustness,
)
from .errors import InvalidParams, NotRobust, NotSpherical, PerSourceUnsupported, RetriesExhausted
from .graph import DiGraph

MAX_RETRIES = 16
HAMMING_C = 64.0


def jl_epsilon(delta: float) -> float:
    return delta / 8.0


def jl_target_dim(n: int, delta: float) -> int | None:
    """``ceil(4 ln(4 n^2) / (eps^2/2 - eps^3/3))`` with ``eps = delta / 8``.

    Union bound over the ``4 n^2`` ordered pairs among 2n vectors. Returns
    None when the exponent is not positive (``delta >= 12`` or infinite),
    in which case no projection is attempted.
    """
    if n < 1 or not math.isfinite(delta):
        return None
    eps = jl_epsilon(delta)
    rate = eps * eps / 2.0 - eps ** 3 / 3.0
    if rate <= 0:
        return None
    return max(1, math.ceil(4.0 * math.log(4.0 * n * n) / rate))


def jl_project(g: DiGraph, e: DistanceEmbedding, delta: float, seed: int,
               max_retries: int = MAX_RETRIES) -> DistanceEmbedding:
    """Project a ``delta``-robust embedding to ``jl_target_dim`` dimensions.

    The threshold grows by ``sqrt(1 + eps)`` to absorb edge stretching.
    Each attempt is checked with the robustness measure and accepted only at
    ``delta / 2`` or better; attempt ``i`` uses stream ``(seed, i)``.
    """
    if e.per_source:
        raise PerSourceUnsupported("uniformize per-source thresholds first")
    if delta <= 0:
        raise InvalidParams("delta must be positive")
    rob = measure_distance_robustness(g, e)
    if not rob.valid or rob.delta < delta - TOL * max(1.0, delta):
        raise NotRobust(f"embedding is not {delta}-robust (measured {rob.delta})")
    m = jl_target_dim(e.n, delta)
    if m is None or m >= e.dim:
        return e
    t = e.threshold * math.sqrt(1.0 + jl_epsilon(delta))
    for attempt in range(max_retries):
        out, inn = _gaussian_project(e.phi_out, e.phi_in, m, make_rng(seed, attempt))
        cand = DistanceEmbedding(out, inn, t)
        got = measure_distance_robustness(g, cand)
        if got.valid and got.delta >= delta / 2.0:
            return cand
    raise RetriesExhausted(f"no projection reached {delta / 2} robustness in {max_retries} tries")


def _gaussian_project(X: np.ndarray, Y: np.ndarray, m: int, rng: np.random.Generator,
                      block_entries: int = 1 << 22) -> tuple[np.ndarray, np.ndarray]:
    """``(X P, Y P)`` for a ``d x m`` matrix ``P`` of N(0, 1/m) entries.

    ``P`` is drawn row block by row block from one stream, which yields the
    same entries as a single ``(d, m)`` draw without holding all of it.
    """
    d = X.shape[1]
    step = max(1, block_entries // m)
    out = np.zeros((X.shape[0], m))
    inn = np.zeros((Y.shape[0], m))
    for lo in range(0, d, step):
        hi = min(d, lo + step)
        P = rng.standard_normal((hi - lo, m))
        out += X[:, lo:hi] @ P
        inn += Y[:, lo:hi] @ P
    scale = 1.0 / math.sqrt(m)
    return out * scale, inn * scale


@dataclass(frozen=True, eq=False)
class HammingEmbedding:
    """Binary codes; (u, v) is an edge iff ``hamming(h_L[u], h_R[v]) <= dist_threshold``.

    Read as +-1 vectors the same codes form a similarity embedding with
    threshold ``sim_threshold = k - 2 * dist_threshold``.
    """

    k: int
    h_L: np.ndarray
    h_R: np.ndarray
    dist_threshold: int

    def __post_init__(self):
        L = np.array(self.h_L, dtype=np.uint8)
        R = np.array(self.h_R, dtype=np.uint8)
        if L.ndim != 2 or L.shape != R.shape or L.shape[1] != self.k:
            raise InvalidParams("codes must be two n x k bit arrays")
        if np.any(L > 1) or np.any(R > 1):
            raise InvalidParams("codes must contain only 0/1")
        if not 0 <= self.dist_threshold <= self.k:
            raise InvalidParams("dist_threshold must lie in [0, k]")
        L.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "h_L", L)
        object.__setattr__(self, "h_R", R)
        object.__setattr__(self, "dist_threshold", int(self.dist_threshold))

    @property
    def n(self) -> int:
        return self.h_L.shape[0]

    @property
    def sim_threshold(self) -> int:
        return self.k - 2 * self.dist_threshold

    def hamming_distances(self) -> np.ndarray:
        L = self.h_L.astype(np.int64)
        R = self.h_R.astype(np.int64)
        return L @ (1 - R).T + (1 - L) @ R.T

    def predicted_edges(self) -> np.ndarray:
        return self.hamming_distances() <= self.dist_threshold

    def as_distance_embedding(self) -> DistanceEmbedding:
        # squared Euclidean distance between 0/1 vectors is the Hamming distance
        return DistanceEmbedding(self.h_L.astype(float), self.h_R.astype(float),
                                 math.sqrt(self.dist_threshold))

    def as_similarity_embedding(self) -> SimilarityEmbedding:
        return SimilarityEmbedding(2.0 * self.h_L - 1.0, 2.0 * self.h_R - 1.0,
                                   float(self.sim_threshold))


def hamming_bits(n: int, delta: float, C: float = HAMMING_C) -> int:
    return math.ceil(C * math.log(n + 1) / (delta * delta))


def halfspace_codes(X: np.ndarray, directions: np.ndarray) -> np.ndarray:
    return (X @ directions.T >= 0).astype(np.uint8)


def random_directions(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    R = rng.standard_normal((k, d))
    return R / np.linalg.norm(R, axis=1, keepdims=True)


def hamming_embed(g: DiGraph, e: SimilarityEmbedding, delta: float, seed: int,
                  C: float = HAMMING_C, max_retries: int = MAX_RETRIES) -> HammingEmbedding:
    """Random-halfspace codes of ``k = ceil(C ln(n+1) / delta^2)`` bits.

    ``e`` must be spherical with edge dots >= ``e.threshold`` and non-edge dots
    <= ``e.threshold - delta``. Writing ``a = arccos(e.threshold - delta)``,
    an attempt is accepted when every edge pair is within
    ``k (a - 2 delta/3) / pi`` bits and every non-edge pair is at least
    ``k (a - delta/3) / pi`` apart; the decision threshold sits at
    ``round(k (a - delta/2) / pi)``.
    """
    if not e.spherical:
        raise NotSpherical("hamming_embed needs unit-norm vectors")
    if delta <= 0:
        raise InvalidParams("delta must be positive")
    rob = measure_similarity_robustness(g, e)
    if not rob.valid or rob.delta < delta - TOL * max(1.0, delta):
        raise NotRobust(f"embedding is not {delta}-robust (measured {rob.delta})")
    n = e.n
    k = hamming_bits(n, delta, C)
    a = math.acos(min(1.0, max(-1.0, e.threshold - delta)))
    edge_cap = k * (a - 2.0 * delta / 3.0) / math.pi
    non_floor = k * (a - delta / 3.0) / math.pi
    cut = min(k, max(0, round(k * (a - delta / 2.0) / math.pi)))
    E = g.edge_mask()
    for attempt in range(max_retries):
        dirs = random_directions(make_rng(seed, attempt), k, e.dim)
        h = HammingEmbedding(k, halfspace_codes(e.phi_L, dirs), halfspace_codes(e.phi_R, dirs), cut)
        D = h.hamming_distances()
        if np.any(D[E] > edge_cap + 1e-9) or np.any(D[~E] < non_floor - 1e-9):
            continue
        if np.array_equal(D <= cut, E):
            return h
    raise RetriesExhausted(f"no code set met the margins in {max_retries} tries")


def halfspace_disagreement(x: np.ndarray, y: np.ndarray, samples: int, seed: int) -> float:
    """Fraction of random halfspaces through the origin that separate ``x`` and ``y``."""
    dirs = random_directions(make_rng(seed), samples, len(x))
    return float(np.mean((dirs @ x >= 0) != (dirs @ y >= 0)))


# ---------------------------------------------------------------------------
# hex code serialization (big-endian bit order, zero-padded)
# ---------------------------------------------------------------------------

def bits_to_hex(bits) -> str:
    bits = [int(b) for b in bits]
    width = max(1, math.ceil(len(bits) / 4))
    value = int("".join(map(str, bits)), 2) if bits else 0
    return format(value, f"0{width}x")


def hex_to_bits(text: str, k: int) -> np.ndarray:
    value = int(text, 16)
    if value >> k:
        raise InvalidParams(f"hex code {text!r} has more than {k} bits")
    return np.array([(value >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
