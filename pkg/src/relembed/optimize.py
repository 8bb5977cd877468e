"""Robustness maximization by low-rank factorized feasibility search.

Both programs fix a rank-``r`` factorization of the Gram matrix (vectors in
``R^r``) and bisect on the robustness level. Each level is a feasibility
problem solved by L-BFGS on a squared-hinge penalty with a small safety
margin; a level counts as reached only if the *measured* robustness of the
returned vectors reaches it. Reported values always come from the measure
functions, never from the penalty.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize

from ._rng import make_rng
from .constructions import svd_construct
from .embeddings import (
    DistanceEmbedding,
    SimilarityEmbedding,
    TranslationalEmbedding,
    measure_distance_robustness,
    measure_similarity_robustness,
    sq_dists,
    verify_translational,
)
from .errors import InvalidParams, TooLarge
from .graph import DiGraph

MARGIN = 1e-3
NORM_FLOOR = 1e-12


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolverConfig:
    max_rank: Optional[int] = None          # default 2n
    bisection_tolerance: float = 1e-4       # relative: hi - lo <= tol * max(1, lo)
    max_iterations: int = 40                # bisection levels
    restarts: int = 4
    seed: int = 0
    delta_cap: Optional[float] = None       # default (2n)^2
    inner_iterations: int = 400             # L-BFGS iterations per attempt
    warm_start: bool = True                 # seed the search with the SVD construction

    def __post_init__(self):
        if self.bisection_tolerance <= 0:
            raise InvalidParams("bisection_tolerance must be positive")
        if self.max_rank is not None and self.max_rank < 1:
            raise InvalidParams("max_rank must be >= 1")
        if self.restarts < 1 or self.max_iterations < 0 or self.inner_iterations < 1:
            raise InvalidParams("restarts, max_iterations and inner_iterations must be positive")

    def rank(self, n: int) -> int:
        return self.max_rank if self.max_rank is not None else max(2 * n, 1)

    def cap(self, n: int) -> float:
        return self.delta_cap if self.delta_cap is not None else float((2 * n) ** 2)

    @classmethod
    def from_mapping(cls, values: dict) -> SolverConfig:
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise InvalidParams(f"unknown solver option {key!r}")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> SolverConfig:
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParams(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        return cls.from_mapping(values)


_INT_KEYS = {"max_rank", "max_iterations", "restarts", "seed", "inner_iterations"}
_FLOAT_KEYS = {"bisection_tolerance", "delta_cap"}


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    if raw.lower() in ("none", ""):
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise InvalidParams(f"bad value for {key}: {raw!r}") from None
    if key == "warm_start":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise InvalidParams(f"bad boolean for warm_start: {raw!r}")
    return raw


@dataclass(frozen=True)
class SolveResult:
    delta: float
    embedding: Union[DistanceEmbedding, SimilarityEmbedding]
    residual: float
    status: Status
    levels: int = 0


# ---------------------------------------------------------------------------
# closeness graph
# ---------------------------------------------------------------------------

def closeness_components(g: DiGraph) -> tuple[np.ndarray, np.ndarray]:
    """Component labels of ``x_0..x_{n-1}`` and ``y_0..y_{n-1}``.

    The closeness graph joins ``x_u`` to ``y_v`` for every edge ``(u, v)``;
    labels are consecutive integers in order of first appearance.
    """
    parent = list(range(2 * g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in g.edges:
        ra, rb = find(u), find(g.n + v)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    labels: dict[int, int] = {}
    comp = np.array([labels.setdefault(find(a), len(labels)) for a in range(2 * g.n)], dtype=int)
    return comp[: g.n], comp[g.n:]


def distance_unbounded(g: DiGraph) -> bool:
    """True when no non-edge joins an out-copy and an in-copy in one closeness component."""
    cx, cy = closeness_components(g)
    same = cx[:, None] == cy[None, :]
    return not np.any(same & ~g.edge_mask())


def distance_upper_bound(g: DiGraph) -> float:
    """``L^2 - 1`` for the shortest closeness path ``L`` between a non-edge's endpoints.

    Each hop of the path is an edge of length at most ``t``, so such a non-edge
    cannot be farther than ``L t``. Returns inf when the program is unbounded.
    """
    n = g.n
    adj: list[list[int]] = [[] for _ in range(2 * n)]
    for u, v in g.edges:
        adj[u].append(n + v)
        adj[n + v].append(u)
    E = g.edge_mask()
    best = math.inf
    for u in range(n):
        dist = [-1] * (2 * n)
        dist[u] = 0
        queue = deque([u])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if dist[b] < 0:
                    dist[b] = dist[a] + 1
                    queue.append(b)
        for v in range(n):
            hops = dist[n + v]
            if hops > 0 and not E[u, v]:
                best = min(best, float(hops * hops - 1))
    return best


def _unbounded_distance_embedding(g: DiGraph) -> DistanceEmbedding:
    # every closeness component collapses to its own point on a line; t = 0
    cx, cy = closeness_components(g)
    return DistanceEmbedding(cx[:, None].astype(float), cy[:, None].astype(float), 0.0)


# ---------------------------------------------------------------------------
# penalties (value and gradient)
# ---------------------------------------------------------------------------

def _distance_penalty(flat: np.ndarray, n: int, r: int, E: np.ndarray, delta: float):
    Z = flat.reshape(2 * n, r)
    X, Y = Z[:n], Z[n:]
    D = sq_dists(X, Y)
    lo = (1.0 + delta) * (1.0 + MARGIN)
    hi = 1.0 - MARGIN
    over = np.where(E, np.maximum(D - hi, 0.0), 0.0)
    under = np.where(E, 0.0, np.maximum(lo - D, 0.0))
    value = float((over ** 2).sum() + (under ** 2).sum())
    G = 2.0 * (over - under)  # dvalue / dD
    gX = 2.0 * (G.sum(1)[:, None] * X - G @ Y)
    gY = 2.0 * (G.sum(0)[:, None] * Y - G.T @ X)
    return value, np.concatenate([gX.ravel(), gY.ravel()])


def _similarity_penalty(flat: np.ndarray, n: int, r: int, E: np.ndarray, delta: float):
    Z = flat[:-1].reshape(2 * n, r)
    t = flat[-1]
    norms = np.maximum(np.linalg.norm(Z, axis=1, keepdims=True), NORM_FLOOR)
    W = Z / norms
    X, Y = W[:n], W[n:]
    S = X @ Y.T
    short = np.where(E, np.maximum(t + MARGIN - S, 0.0), 0.0)
    excess = np.where(E, 0.0, np.maximum(S - t + delta + MARGIN, 0.0))
    value = float((short ** 2).sum() + (excess ** 2).sum())
    G = 2.0 * (excess - short)  # dvalue / dS
    gW = np.vstack([G @ Y, G.T @ X])
    gZ = (gW - (gW * W).sum(1, keepdims=True) * W) / norms
    gt = 2.0 * (short.sum() - excess.sum())
    return value, np.concatenate([gZ.ravel(), [gt]])


def _lbfgs(fun: Callable, x0: np.ndarray, args: tuple, iters: int) -> np.ndarray:
    res = minimize(fun, x0, args=args, jac=True, method="L-BFGS-B",
                   options={"maxiter": iters, "gtol": 1e-12, "ftol": 1e-15})
    return res.x


# ---------------------------------------------------------------------------
# distance program
# ---------------------------------------------------------------------------

def _normalized_distance(g: DiGraph, X: np.ndarray, Y: np.ndarray) -> Optional[DistanceEmbedding]:
    """Rescale so the farthest edge sits at distance exactly 1 (t = 1)."""
    D = sq_dists(X, Y)
    E = g.edge_mask()
    far = float(D[E].max())
    if far <= 0.0:
        return None
    s = 1.0 / math.sqrt(far)
    emb = DistanceEmbedding(X * s, Y * s, 1.0)
    return emb if measure_distance_robustness(g, emb).valid else None


def _pad(M: np.ndarray, r: int) -> np.ndarray:
    if M.shape[1] >= r:
        return M[:, :r] if M.shape[1] == r else M
    return np.hstack([M, np.zeros((M.shape[0], r - M.shape[1]))])


def max_distance_robustness(g: DiGraph, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Largest multiplicative distance-robustness at ``t = 1``.

    Unbounded instances (every non-edge crosses closeness components) are
    detected combinatorially and answered with a ``t = 0`` embedding whose
    measured robustness is infinite.
    """
    if distance_unbounded(g):
        emb = _unbounded_distance_embedding(g)
        return SolveResult(math.inf, emb, 0.0, Status.UNBOUNDED)

    n = g.n
    E = g.edge_mask()
    r = cfg.rank(n)
    hi = min(distance_upper_bound(g), cfg.cap(n))

    fallback = svd_construct(g)[0]
    start = _normalized_distance(g, fallback.phi_out, fallback.phi_in)
    best: Optional[DistanceEmbedding] = start if cfg.warm_start else None
    lo = measure_distance_robustness(g, best).delta if best is not None else 0.0

    def attempt(level: int, delta: float) -> Optional[tuple[float, DistanceEmbedding]]:
        for k in range(cfg.restarts):
            rng = make_rng(cfg.seed, level, k)
            if best is not None and k == 0:
                Z0 = np.vstack([_pad(best.phi_out, r), _pad(best.phi_in, r)])
                if Z0.shape[1] > r:
                    Z0 = Z0[:, :r]
                Z0 = Z0 + 1e-3 * rng.standard_normal(Z0.shape)
            else:
                Z0 = rng.standard_normal((2 * n, r)) * math.sqrt((1.0 + delta) / (2 * r))
            flat = _lbfgs(_distance_penalty, Z0.ravel(), (n, r, E, delta), cfg.inner_iterations)
            Z = flat.reshape(2 * n, r)
            emb = _normalized_distance(g, Z[:n], Z[n:])
            if emb is None:
                continue
            got = measure_distance_robustness(g, emb).delta
            if got >= delta:
                return got, emb
        return None

    lo, hi, best, levels, converged = _bisect(lo, hi, best, attempt, cfg)
    if best is None:
        best = start
        lo = measure_distance_robustness(g, best).delta
        converged = False
    rob = measure_distance_robustness(g, best)
    D = best.sq_dists()
    residual = max(0.0, float(D[E].max()) - 1.0, float((1.0 + rob.delta) - D[~E].min()))
    status = Status.OPTIMAL if converged else Status.FEASIBLE
    return SolveResult(rob.delta, best, residual, status, levels)


def _bisect(lo, hi, best, attempt, cfg: SolverConfig):
    levels = 0
    converged = False
    for level in range(cfg.max_iterations):
        if hi - lo <= cfg.bisection_tolerance * max(1.0, lo):
            converged = True
            break
        mid = 0.5 * (lo + hi)
        levels += 1
        found = attempt(level, mid)
        if found is None:
            hi = mid
        else:
            lo, best = min(found[0], hi), found[1]
    else:
        converged = hi - lo <= cfg.bisection_tolerance * max(1.0, lo)
    return lo, hi, best, levels, converged


# ---------------------------------------------------------------------------
# similarity program
# ---------------------------------------------------------------------------

def _tight_similarity(g: DiGraph, X: np.ndarray, Y: np.ndarray) -> Optional[SimilarityEmbedding]:
    """Unit vectors with the threshold moved to the smallest edge dot."""
    X = X / np.maximum(np.linalg.norm(X, axis=1, keepdims=True), NORM_FLOOR)
    Y = Y / np.maximum(np.linalg.norm(Y, axis=1, keepdims=True), NORM_FLOOR)
    S = X @ Y.T
    emb = SimilarityEmbedding(X, Y, float(S[g.edge_mask()].min()))
    return emb if measure_similarity_robustness(g, emb).valid else None


def max_similarity_robustness(g: DiGraph, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Largest additive similarity-robustness over unit vectors with a free threshold."""
    n = g.n
    E = g.edge_mask()
    if n == 0 or E.all() or not E.any():
        # one side of the constraint set is empty: the threshold runs off to +-inf
        X = np.ones((n, 1))
        Y = np.ones((n, 1)) if E.all() else -np.ones((n, 1))
        emb = SimilarityEmbedding(X, Y, 1.0)
        return SolveResult(math.inf, emb, 0.0, Status.UNBOUNDED)

    r = cfg.rank(n)
    hi = 2.0
    start = _tight_similarity(g, *(lambda s: (s.phi_L, s.phi_R))(svd_construct(g)[1]))
    best: Optional[SimilarityEmbedding] = start if cfg.warm_start else None
    lo = measure_similarity_robustness(g, best).delta if best is not None else 0.0

    def attempt(level: int, delta: float):
        for k in range(cfg.restarts):
            rng = make_rng(cfg.seed, level, k)
            if best is not None and k == 0:
                Z0 = np.vstack([_pad(best.phi_L, r), _pad(best.phi_R, r)])[:, :r]
                Z0 = Z0 + 1e-3 * rng.standard_normal(Z0.shape)
                t0 = best.threshold
            else:
                Z0 = rng.standard_normal((2 * n, r))
                t0 = 0.0
            x0 = np.concatenate([Z0.ravel(), [t0]])
            flat = _lbfgs(_similarity_penalty, x0, (n, r, E, delta), cfg.inner_iterations)
            Z = flat[:-1].reshape(2 * n, r)
            emb = _tight_similarity(g, Z[:n], Z[n:])
            if emb is None:
                continue
            got = measure_similarity_robustness(g, emb).delta
            if got >= delta:
                return got, emb
        return None

    lo, hi, best, levels, converged = _bisect(lo, hi, best, attempt, cfg)
    if best is None:
        best = start
        converged = False
    rob = measure_similarity_robustness(g, best)
    S = best.dots()
    residual = max(0.0, best.threshold - float(S[E].min()),
                   float(S[~E].max()) - (best.threshold - rob.delta))
    status = Status.OPTIMAL if converged else Status.FEASIBLE
    return SolveResult(rob.delta, best, residual, status, levels)


# ---------------------------------------------------------------------------
# translational fitter
# ---------------------------------------------------------------------------

TRANSLATIONAL_MARGIN = 0.05


def _translational_penalty(flat: np.ndarray, n: int, r: int, E: np.ndarray, off: np.ndarray):
    phi = flat[: n * r].reshape(n, r)
    zr = flat[n * r: n * r + r]
    s = flat[n * r + r:]
    zn = max(np.linalg.norm(zr), NORM_FLOOR)
    z = zr / zn
    T = s * s
    D = sq_dists(phi + z, phi)  # D[u, v] = |phi_v - phi_u - z|^2
    over = np.where(E & off, np.maximum(D - T[:, None] + TRANSLATIONAL_MARGIN, 0.0), 0.0)
    under = np.where(~E & off, np.maximum(T[:, None] + TRANSLATIONAL_MARGIN - D, 0.0), 0.0)
    value = float((over ** 2).sum() + (under ** 2).sum())
    G = 2.0 * (over - under)  # dvalue / dD
    rows = G.sum(1)
    cols = G.sum(0)
    Gphi = G @ phi
    # sum_v G[u,v] (phi_v - phi_u - z) for each u
    out_term = Gphi - rows[:, None] * phi - rows[:, None] * z
    # sum_u G[u,v] (phi_v - phi_u - z) for each v
    in_term = cols[:, None] * phi - G.T @ phi - cols[:, None] * z
    g_phi = 2.0 * (in_term - out_term)
    g_z = -2.0 * out_term.sum(0)
    g_zr = (g_z - (g_z @ z) * z) / zn
    g_s = 2.0 * s * 2.0 * (under.sum(1) - over.sum(1))
    return value, np.concatenate([g_phi.ravel(), g_zr, g_s])


def fit_translational(g: DiGraph, cfg: SolverConfig = SolverConfig()) -> Optional[TranslationalEmbedding]:
    """Multi-restart local search for a translational embedding.

    Returns an embedding only if it passes exact verification; ``None`` when
    every restart fails (which proves nothing on its own).
    """
    n = g.n
    r = cfg.rank(n)
    if n <= 1:
        z = np.zeros(max(r, 1))
        z[0] = 1.0
        emb = TranslationalEmbedding(np.zeros((n, len(z))), z, np.zeros(n))
        return emb if verify_translational(g, emb) else None
    E = g.edge_mask()
    off = ~np.eye(n, dtype=bool)
    for k in range(cfg.restarts):
        rng = make_rng(cfg.seed, k)
        phi0 = rng.standard_normal((n, r))
        z0 = rng.standard_normal(r)
        s0 = np.ones(n)
        flat = _lbfgs(_translational_penalty, np.concatenate([phi0.ravel(), z0, s0]),
                      (n, r, E, off), cfg.inner_iterations)
        phi = flat[: n * r].reshape(n, r)
        z = flat[n * r: n * r + r]
        z = z / max(np.linalg.norm(z), NORM_FLOOR)
        t = np.abs(flat[n * r + r:])
        emb = TranslationalEmbedding(phi, z, t)
        if verify_translational(g, emb):
            return emb
    return None


# ---------------------------------------------------------------------------
# exact optimum for graphs on at most two nodes
# ---------------------------------------------------------------------------

_GRID_BOX = 5.0
_COARSE_STEP = 0.05
_FINE_STEP = 1e-3
_ANGLE_COARSE = 2 * math.pi / 180


def oracle_robustness_tiny(g: DiGraph, kind: str) -> float:
    """Ground-truth optimum for ``n <= 2`` by case analysis and grid search.

    Distance: one coordinate per vector on a grid over ``[-5, 5]`` (first
    out-vector pinned at 0), coarse pass then a ``1e-3`` refinement. Any
    three-hop closeness path already caps the ratio at 9 in every dimension
    and a line attains it, so one dimension is enough. Similarity: unit
    vectors in the plane given by angles (first left vector pinned at 0),
    coarse pass then ``1e-3`` refinement.
    """
    if g.n > 2:
        raise TooLarge("oracle handles at most two nodes")
    if kind not in ("distance", "similarity"):
        raise InvalidParams(f"unknown kind {kind!r}")
    E = g.edge_mask()
    if kind == "distance":
        if distance_unbounded(g):
            return math.inf
        return _grid_search(_distance_score(E), 2 * g.n - 1, -_GRID_BOX, _GRID_BOX,
                            _COARSE_STEP, _FINE_STEP, periodic=False)
    if g.n == 0 or E.all() or not E.any():
        return math.inf
    return _grid_search(_similarity_score(E), 2 * g.n - 1, 0.0, 2 * math.pi,
                        _ANGLE_COARSE, _FINE_STEP, periodic=True)


def _distance_score(E: np.ndarray):
    n = E.shape[0]
    pairs = [(u, v) for u in range(n) for v in range(n)]

    def score(P: np.ndarray) -> np.ndarray:
        # P: (batch, 2n-1) -> positions with x_0 pinned at 0
        pos = np.hstack([np.zeros((P.shape[0], 1)), P])
        edge_max = np.zeros(P.shape[0])
        non_min = np.full(P.shape[0], np.inf)
        for u, v in pairs:
            d2 = (pos[:, u] - pos[:, n + v]) ** 2
            if E[u, v]:
                edge_max = np.maximum(edge_max, d2)
            else:
                non_min = np.minimum(non_min, d2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(edge_max > 0, non_min / edge_max - 1.0,
                             np.where(non_min > 0, np.inf, -1.0))
        return np.where(non_min > edge_max, ratio, -1.0)

    return score


def _similarity_score(E: np.ndarray):
    n = E.shape[0]
    pairs = [(u, v) for u in range(n) for v in range(n)]

    def score(P: np.ndarray) -> np.ndarray:
        ang = np.hstack([np.zeros((P.shape[0], 1)), P])
        edge_min = np.full(P.shape[0], np.inf)
        non_max = np.full(P.shape[0], -np.inf)
        for u, v in pairs:
            dot = np.cos(ang[:, u] - ang[:, n + v])
            if E[u, v]:
                edge_min = np.minimum(edge_min, dot)
            else:
                non_max = np.maximum(non_max, dot)
        return edge_min - non_max

    return score


def _grid_search(score, dims: int, lo: float, hi: float, coarse: float, fine: float,
                 periodic: bool, keep: int = 8) -> float:
    if dims == 0:
        return float(score(np.zeros((1, 0)))[0])
    axis = np.arange(lo, hi + (0.0 if periodic else coarse / 2), coarse)
    if periodic:
        axis = axis[axis < hi]
    # iterate over the first coordinate, vectorize over the rest
    rest = np.array(list(itertools.product(axis, repeat=dims - 1))) if dims > 1 else np.zeros((1, 0))
    candidates: list[tuple[float, np.ndarray]] = []
    for a in axis:
        P = np.hstack([np.full((len(rest), 1), a), rest])
        s = score(P)
        idx = np.argsort(-s)[:keep]
        candidates.extend((float(s[i]), P[i]) for i in idx)
    candidates.sort(key=lambda c: -c[0])
    best = candidates[0][0]
    if math.isinf(best):
        return best
    offsets = np.arange(-coarse, coarse + fine / 2, fine)
    local = np.array(list(itertools.product(offsets, repeat=dims)))
    for _, centre in candidates[:keep]:
        P = centre[None, :] + local
        if not periodic:
            P = P[np.all((P >= lo - 1e-12) & (P <= hi + 1e-12), axis=1)]
        if len(P):
            best = max(best, float(score(P).max()))
    return best
