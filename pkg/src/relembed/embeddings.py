"""Embedding types, exact verification and robustness measurement.

Distance and similarity verification quantify over every ordered pair
including ``u == v``; translational verification skips self-pairs.
All comparisons are made on squared distances (or dot products) with an
absolute tolerance of ``TOL``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    InvalidParams,
    PerSourceUnsupported,
    SizeMismatch,
    ZeroEmbedding,
    ZeroThreshold,
)
from .graph import DiGraph

TOL = 1e-9
UNIT_TOL = 1e-9


def _frozen_matrix(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise InvalidParams(f"{name} must be a 2-D array (one row per node)")
    if not np.all(np.isfinite(arr)):
        raise InvalidParams(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _pair_shapes(a: np.ndarray, b: np.ndarray, names: str) -> None:
    if a.shape != b.shape:
        raise InvalidParams(f"{names} shapes differ: {a.shape} vs {b.shape}")


def sq_dists(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix of squared distances ``|X[i] - Y[j]|^2``."""
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], Y.shape[0]))
    D = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
    return np.maximum(D, 0.0)


@dataclass(frozen=True, eq=False)
class DistanceEmbedding:
    """Out/in vector families with a uniform threshold or one threshold per source node."""

    phi_out: np.ndarray
    phi_in: np.ndarray
    threshold: float | np.ndarray

    def __post_init__(self):
        out = _frozen_matrix(self.phi_out, "phi_out")
        inn = _frozen_matrix(self.phi_in, "phi_in")
        _pair_shapes(out, inn, "phi_out/phi_in")
        object.__setattr__(self, "phi_out", out)
        object.__setattr__(self, "phi_in", inn)
        t = self.threshold
        if np.ndim(t) == 0:
            t = float(t)
            if not math.isfinite(t) or t < 0:
                raise InvalidParams(f"threshold must be finite and >= 0, got {t}")
        else:
            t = np.array(t, dtype=float)
            if t.shape != (out.shape[0],):
                raise InvalidParams("per-source thresholds need one value per node")
            if np.any(t < 0) or not np.all(np.isfinite(t)):
                raise InvalidParams("per-source thresholds must be finite and >= 0")
            t.setflags(write=False)
        object.__setattr__(self, "threshold", t)

    @property
    def n(self) -> int:
        return self.phi_out.shape[0]

    @property
    def dim(self) -> int:
        return self.phi_out.shape[1]

    @property
    def per_source(self) -> bool:
        return isinstance(self.threshold, np.ndarray)

    def source_thresholds(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.threshold, dtype=float), (self.n,))

    def sq_dists(self) -> np.ndarray:
        return sq_dists(self.phi_out, self.phi_in)

    def is_spherical(self, tol: float = UNIT_TOL) -> bool:
        norms = np.linalg.norm(np.vstack([self.phi_out, self.phi_in]), axis=1)
        return bool(np.all(np.abs(norms - 1.0) <= tol))

    def scaled(self, factor: float) -> DistanceEmbedding:
        return DistanceEmbedding(self.phi_out * factor, self.phi_in * factor,
                                 np.asarray(self.threshold) * factor if self.per_source
                                 else self.threshold * factor)


@dataclass(frozen=True, eq=False)
class SimilarityEmbedding:
    """Left/right vector families; (u, v) is an edge iff ``L[u] . R[v] >= threshold``."""

    phi_L: np.ndarray
    phi_R: np.ndarray
    threshold: float

    def __post_init__(self):
        L = _frozen_matrix(self.phi_L, "phi_L")
        R = _frozen_matrix(self.phi_R, "phi_R")
        _pair_shapes(L, R, "phi_L/phi_R")
        t = float(self.threshold)
        if not math.isfinite(t):
            raise InvalidParams("similarity threshold must be finite")
        object.__setattr__(self, "phi_L", L)
        object.__setattr__(self, "phi_R", R)
        object.__setattr__(self, "threshold", t)

    @property
    def n(self) -> int:
        return self.phi_L.shape[0]

    @property
    def dim(self) -> int:
        return self.phi_L.shape[1]

    @property
    def spherical(self) -> bool:
        norms = np.linalg.norm(np.vstack([self.phi_L, self.phi_R]), axis=1)
        return bool(np.all(np.abs(norms - 1.0) <= UNIT_TOL))

    def dots(self) -> np.ndarray:
        return self.phi_L @ self.phi_R.T

    def max_sq_norm(self) -> float:
        if self.n == 0:
            return 0.0
        return float(max((self.phi_L ** 2).sum(1).max(), (self.phi_R ** 2).sum(1).max()))

    def scaled(self, factor: float) -> SimilarityEmbedding:
        return SimilarityEmbedding(self.phi_L * factor, self.phi_R * factor,
                                   self.threshold * factor * factor)


@dataclass(frozen=True, eq=False)
class TranslationalEmbedding:
    """Single vector family, unit direction ``z`` and a threshold per source node."""

    phi: np.ndarray
    z: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        phi = _frozen_matrix(self.phi, "phi")
        z = np.array(self.z, dtype=float).reshape(-1)
        if z.shape != (phi.shape[1],):
            raise InvalidParams("z must have the embedding dimension")
        if abs(np.linalg.norm(z) - 1.0) > UNIT_TOL:
            raise InvalidParams("z must be a unit vector")
        z.setflags(write=False)
        t = np.array(np.broadcast_to(np.asarray(self.thresholds, dtype=float), (phi.shape[0],)))
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InvalidParams("thresholds must be finite and >= 0")
        t.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "thresholds", t)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def dim(self) -> int:
        return self.phi.shape[1]

    @property
    def uniform(self) -> bool:
        return self.n == 0 or bool(np.all(self.thresholds == self.thresholds[0]))

    def sq_dists(self) -> np.ndarray:
        """``D[u, v] = |phi(v) - (phi(u) + z)|^2``."""
        return sq_dists(self.phi + self.z, self.phi)


@dataclass(frozen=True)
class Verdict:
    valid: bool
    witness: Optional[tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class RobustnessResult:
    """Robustness at the stored threshold (``delta``) and at the best threshold (``optimal_delta``).

    For distance embeddings the best threshold is the largest edge distance;
    for similarity embeddings it is the smallest edge dot product.
    """

    valid: bool
    delta: float
    witness: Optional[tuple[int, int]]
    effective_threshold: float
    optimal_delta: float


@dataclass(frozen=True)
class DiameterStats:
    diameter: float
    diameter_ratio: float
    max_norm: float
    scaled_diameter: float


def _check_size(g: DiGraph, n: int) -> None:
    if g.n != n:
        raise SizeMismatch(f"graph has {g.n} nodes, embedding has {n}")


def _first(mask: np.ndarray) -> Optional[tuple[int, int]]:
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None
    return int(hits[0, 0]), int(hits[0, 1])


def _verdict(g: DiGraph, predicted: np.ndarray, skip_diagonal: bool = False) -> Verdict:
    wrong = predicted != g.edge_mask()
    if skip_diagonal:
        np.fill_diagonal(wrong, False)
    witness = _first(wrong)
    return Verdict(witness is None, witness)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_distance(g: DiGraph, e: DistanceEmbedding) -> Verdict:
    """Check ``(u,v) in E  <=>  |out(u) - in(v)| <= t_u`` for every ordered pair."""
    _check_size(g, e.n)
    t2 = e.source_thresholds()[:, None] ** 2
    return _verdict(g, e.sq_dists() <= t2 + TOL)


def verify_similarity(g: DiGraph, e: SimilarityEmbedding) -> Verdict:
    _check_size(g, e.n)
    return _verdict(g, e.dots() >= e.threshold - TOL)


def verify_translational(g: DiGraph, e: TranslationalEmbedding) -> Verdict:
    _check_size(g, e.n)
    t2 = e.thresholds[:, None] ** 2
    return _verdict(g, e.sq_dists() <= t2 + TOL, skip_diagonal=True)


# ---------------------------------------------------------------------------
# robustness
# ---------------------------------------------------------------------------

def measure_distance_robustness(g: DiGraph, e: DistanceEmbedding) -> RobustnessResult:
    """Multiplicative margin: non-edges at squared distance >= t^2 (1 + delta)."""
    if e.per_source:
        raise PerSourceUnsupported("uniformize per-source thresholds before measuring robustness")
    verdict = verify_distance(g, e)
    D = e.sq_dists()
    E = g.edge_mask()
    max_edge = float(D[E].max()) if E.any() else 0.0
    t_eff = math.sqrt(max_edge)
    if not verdict:
        return RobustnessResult(False, 0.0, verdict.witness, t_eff, 0.0)
    non = D[~E]
    if non.size == 0:
        return RobustnessResult(True, math.inf, None, t_eff, math.inf)
    closest = float(non.min())

    def margin(t2: float) -> float:
        if t2 <= TOL:
            return math.inf
        return max(0.0, closest / t2 - 1.0)

    return RobustnessResult(True, margin(e.threshold ** 2), None, t_eff, margin(max_edge))


def measure_similarity_robustness(g: DiGraph, e: SimilarityEmbedding) -> RobustnessResult:
    """Additive margin below the threshold, normalized by the largest squared norm."""
    _check_size(g, e.n)
    dots = e.dots()
    E = g.edge_mask()
    non = dots[~E]
    M = e.max_sq_norm()
    if non.size and M == 0.0:
        raise ZeroEmbedding("all vectors are zero; similarity robustness undefined")
    t_star = float(dots[E].min()) if E.any() else math.inf
    verdict = verify_similarity(g, e)
    if not verdict:
        return RobustnessResult(False, 0.0, verdict.witness, t_star, 0.0)
    if non.size == 0:
        return RobustnessResult(True, math.inf, None, t_star, math.inf)
    top = float(non.max())
    delta = max(0.0, (e.threshold - top) / M)
    optimal = math.inf if math.isinf(t_star) else max(0.0, (t_star - top) / M)
    return RobustnessResult(True, delta, None, t_star, optimal)


def diameter_stats(e: DistanceEmbedding) -> DiameterStats:
    if e.per_source:
        raise PerSourceUnsupported("diameter ratio needs a uniform threshold")
    if e.threshold <= 0:
        raise ZeroThreshold("diameter ratio undefined for t = 0")
    V = np.vstack([e.phi_out, e.phi_in])
    diam = math.sqrt(float(sq_dists(V, V).max())) if len(V) else 0.0
    B = float(np.linalg.norm(V, axis=1).max()) if len(V) else 0.0
    t = e.threshold
    return DiameterStats(diam, diam / t, B, max(B / t, 1.0))


# ---------------------------------------------------------------------------
# transformations and obstructions
# ---------------------------------------------------------------------------

def uniformize_thresholds(e: DistanceEmbedding) -> DistanceEmbedding:
    """Trade per-source thresholds for one extra coordinate on the out-vectors.

    With ``t = max t_u`` the out-vector of ``u`` gains ``sqrt(t^2 - t_u^2)`` and
    every in-vector gains 0, so ``|out(u) - in(v)| <= t_u`` becomes ``<= t``.
    """
    tu = e.source_thresholds()
    t = float(tu.max()) if tu.size else 0.0
    pad = np.sqrt(np.maximum(t * t - tu * tu, 0.0))
    out = np.hstack([e.phi_out, pad[:, None]])
    inn = np.hstack([e.phi_in, np.zeros((e.n, 1))])
    return DistanceEmbedding(out, inn, t)


def translational_obstruction(g: DiGraph) -> Optional[list[int]]:
    """Directed cycle made only of one-way edges, if any.

    Along such a cycle the projections of consecutive differences onto the
    translation vector must each exceed a quantity that telescopes to zero,
    so its presence rules out every translational embedding. ``None`` says
    nothing about feasibility.
    """
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in g.sorted_edges():
        if u != v and (v, u) not in g.edges:
            succ[u].append(v)

    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * g.n
    for root in range(g.n):
        if color[root] != WHITE:
            continue
        stack = [root]
        iters = {root: iter(succ[root])}
        color[root] = GREY
        while stack:
            u = stack[-1]
            nxt = next(iters[u], None)
            if nxt is None:
                color[u] = BLACK
                stack.pop()
            elif color[nxt] == GREY:
                cyc = stack[stack.index(nxt):]
                k = cyc.index(min(cyc))
                return cyc[k:] + cyc[:k]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                iters[nxt] = iter(succ[nxt])
                stack.append(nxt)
    return None
