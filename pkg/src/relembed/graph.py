"""Directed graphs, generators, edge-list I/O and adjacency spectra."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._rng import make_rng
from .errors import (
    EdgeListParseError,
    EmptySignSet,
    InvalidGraph,
    InvalidParams,
    SamplingFailed,
    UnknownFamily,
)

RANK_RTOL = 1e-9
BOUNDED_DEGREE_RETRIES = 10_000
SIGN_SET_RETRIES = 1_000

Edge = tuple[int, int]


@dataclass(frozen=True)
class DiGraph:
    """Directed graph on nodes ``0..n-1``; self-loops allowed, no multi-edges."""

    n: int
    edges: frozenset[Edge]

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise InvalidGraph(f"node count must be a non-negative integer, got {n!r}")
        es = set()
        for e in edges:
            if len(e) != 2:
                raise InvalidGraph(f"edge {tuple(e)!r} is not a pair")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraph(f"edge ({u}, {v}) out of range for n={n}")
            es.add((u, v))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(es))

    @classmethod
    def from_adjacency(cls, A) -> DiGraph:
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidGraph("adjacency matrix must be square")
        return cls(A.shape[0], zip(*np.nonzero(A)))

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, edges={self.sorted_edges()})"

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=float)
        for u, v in self.edges:
            A[u, v] = 1.0
        return A

    def edge_mask(self) -> np.ndarray:
        return self.adjacency().astype(bool)

    def out_degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for u, _ in self.edges:
            d[u] += 1
        return d

    def in_degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for _, v in self.edges:
            d[v] += 1
        return d

    def max_out_degree(self) -> int:
        return int(self.out_degrees().max()) if self.n else 0

    def max_in_degree(self) -> int:
        return int(self.in_degrees().max()) if self.n else 0

    def undirected_edges(self) -> set[frozenset[int]]:
        """Edges of the underlying simple undirected graph (self-loops dropped)."""
        return {frozenset(e) for e in self.edges if e[0] != e[1]}

    def relabel(self, perm: Sequence[int]) -> DiGraph:
        """Graph with node ``u`` renamed to ``perm[u]``."""
        return DiGraph(self.n, ((perm[u], perm[v]) for u, v in self.edges))

    def topological_order(self) -> list[int] | None:
        """Smallest-index-first topological order, or None when cyclic.

        Self-loops count as cycles.
        """
        indeg = self.in_degrees()
        succ: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            succ[u].append(v)
        heap = [u for u in range(self.n) if indeg[u] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            u = heapq.heappop(heap)
            order.append(u)
            for v in succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, v)
        return order if len(order) == self.n else None

    def is_acyclic(self) -> bool:
        return self.topological_order() is not None


@dataclass(frozen=True)
class Spectrum:
    rank: int
    sigma1: float


@dataclass(frozen=True)
class SignSet:
    """Duplicate-free, insertion-ordered set of sign vectors with entries +1/-1."""

    n_coords: int
    vectors: tuple[tuple[int, ...], ...]

    def __init__(self, vectors: Iterable[Sequence], n_coords: int | None = None):
        seen: dict[tuple[int, ...], None] = {}
        for vec in vectors:
            seen.setdefault(tuple(_parse_sign(s) for s in vec), None)
        vecs = tuple(seen)
        if n_coords is None:
            n_coords = len(vecs[0]) if vecs else 0
        if any(len(v) != n_coords for v in vecs):
            raise InvalidParams("sign vectors must all have length n_coords")
        object.__setattr__(self, "n_coords", int(n_coords))
        object.__setattr__(self, "vectors", vecs)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def as_strings(self) -> list[str]:
        return ["".join("+" if s > 0 else "-" for s in v) for v in self.vectors]


def _parse_sign(s) -> int:
    if s in ("+", 1, True):
        return 1
    if s in ("-", -1):
        return -1
    raise InvalidParams(f"not a sign: {s!r}")


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

FAMILIES = (
    "path",
    "cycle",
    "complete_bipartite",
    "bidirected_complete_with_loops",
    "random_gnp",
    "random_dag",
    "bounded_degree",
    "km_distance",
    "km_similarity",
)


def _need_n(params: dict, key: str = "n", minimum: int = 1) -> int:
    if key not in params:
        raise InvalidParams(f"missing parameter {key!r}")
    val = params[key]
    if not isinstance(val, (int, np.integer)) or isinstance(val, bool) or val < minimum:
        raise InvalidParams(f"{key} must be an integer >= {minimum}, got {val!r}")
    return int(val)


def _need_p(params: dict, default: float | None = None) -> float:
    p = params.get("p", default)
    if p is None:
        raise InvalidParams("missing parameter 'p'")
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise InvalidParams(f"p must lie in [0, 1], got {p}")
    return p


def _gnp_mask(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    return mask


def generate(family: str, *, seed: int = 0, **params) -> DiGraph:
    """Build a graph from a named family.

    Parameters per family::

        path, cycle, bidirected_complete_with_loops   n
        complete_bipartite     n (|V1|), m (|V2|, default n), bidirected (bool)
        random_gnp, random_dag n, p
        bounded_degree         n, deg, p (default deg / (4 (n-1)))
        km_distance, km_similarity
                               n (hyperplanes), k (default 2), points (default 4n)

    Output depends only on ``(family, params, seed)``.
    """
    if family not in FAMILIES:
        raise UnknownFamily(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")

    if family == "path":
        n = _need_n(params)
        return DiGraph(n, ((i, i + 1) for i in range(n - 1)))

    if family == "cycle":
        n = _need_n(params)
        if n == 1:
            return DiGraph(1)
        return DiGraph(n, ((i, (i + 1) % n) for i in range(n)))

    if family == "bidirected_complete_with_loops":
        n = _need_n(params)
        return DiGraph(n, ((u, v) for u in range(n) for v in range(n)))

    if family == "complete_bipartite":
        n1 = _need_n(params)
        n2 = _need_n({"m": params.get("m", n1)}, "m")
        edges = [(u, n1 + v) for u in range(n1) for v in range(n2)]
        if params.get("bidirected", False):
            edges += [(v, u) for u, v in edges]
        return DiGraph(n1 + n2, edges)

    if family in ("random_gnp", "random_dag"):
        n = _need_n(params)
        p = _need_p(params)
        mask = _gnp_mask(n, p, make_rng(seed))
        if family == "random_dag":
            mask = np.triu(mask, k=1)
        return DiGraph(n, zip(*np.nonzero(mask)))

    if family == "bounded_degree":
        n = _need_n(params)
        deg = params.get("deg")
        if not isinstance(deg, (int, np.integer)) or isinstance(deg, bool) or deg < 0:
            raise InvalidParams(f"deg must be an integer >= 0, got {deg!r}")
        p = _need_p(params, default=min(1.0, deg / (4 * max(n - 1, 1))))
        return _bounded_degree(n, int(deg), p, seed)

    # km_distance / km_similarity
    n_h = _need_n(params)
    k = _need_n({"k": params.get("k", 2)}, "k")
    points = _need_n({"points": params.get("points", 4 * n_h)}, "points", minimum=2)
    S = realizable_sign_set(n_h, k, points, seed)
    return km_distance_graph(S) if family == "km_distance" else km_similarity_graph(S)


def _bounded_degree(n: int, deg: int, p: float, seed: int) -> DiGraph:
    for attempt in range(BOUNDED_DEGREE_RETRIES):
        mask = _gnp_mask(n, p, make_rng(seed, attempt))
        if mask.sum(axis=1).max(initial=0) <= deg and mask.sum(axis=0).max(initial=0) <= deg:
            return DiGraph(n, zip(*np.nonzero(mask)))
    raise SamplingFailed(
        f"no G({n}, {p}) sample with max degree <= {deg} in {BOUNDED_DEGREE_RETRIES} tries"
    )


# ---------------------------------------------------------------------------
# hyperplane-arrangement reduction graphs
# ---------------------------------------------------------------------------

def km_distance_graph(S: SignSet) -> DiGraph:
    """Nodes a_0..a_{m-1}, b_0..b_{m-1}, then one c-node per sign vector.

    (a_i, c) is an edge iff the vector is + at i; (b_i, c) iff it is - at i.
    """
    if len(S) == 0:
        raise EmptySignSet("sign set is empty")
    m = S.n_coords
    edges = []
    for j, sigma in enumerate(S.vectors):
        c = 2 * m + j
        for i, s in enumerate(sigma):
            edges.append((i, c) if s > 0 else (m + i, c))
    return DiGraph(2 * m + len(S), edges)


def km_similarity_graph(S: SignSet) -> DiGraph:
    """Nodes a_0..a_{m-1} then one c-node per vector; (a_i, c) iff + at i."""
    if len(S) == 0:
        raise EmptySignSet("sign set is empty")
    m = S.n_coords
    edges = [(i, m + j) for j, sigma in enumerate(S.vectors) for i, s in enumerate(sigma) if s > 0]
    return DiGraph(m + len(S), edges)


def _unit_ball(rng: np.random.Generator, count: int, k: int) -> np.ndarray:
    x = rng.standard_normal((count, k))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * rng.random((count, 1)) ** (1.0 / k)


def realizable_sign_set(n_hyperplanes: int, k: int, n_points: int, seed: int) -> SignSet:
    """Sign vectors of random points in the unit k-ball against random oriented hyperplanes.

    The first two sampled points serve as anchors: each hyperplane is oriented
    and offset so that the first lies strictly on its positive side and the
    second strictly on its negative side. The all-plus and all-minus vectors
    are therefore always present, and the set is k-realizable by construction.
    """
    if n_hyperplanes < 1 or k < 1 or n_points < 2:
        raise InvalidParams("need n_hyperplanes >= 1, k >= 1, n_points >= 2")
    for attempt in range(SIGN_SET_RETRIES):
        rng = make_rng(seed, attempt)
        pts = _unit_ball(rng, n_points, k)
        normals = rng.standard_normal((n_hyperplanes, k))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        lo = normals @ pts[1]
        hi = normals @ pts[0]
        flip = hi < lo
        normals[flip] *= -1
        lo, hi = np.where(flip, -lo, lo), np.where(flip, -hi, hi)
        if np.any(hi - lo < 1e-9):
            continue
        offsets = lo + (hi - lo) * rng.uniform(0.05, 0.95, size=n_hyperplanes)
        side = pts @ normals.T - offsets
        if np.any(np.abs(side) < 1e-12):
            continue
        signs = np.where(side > 0, 1, -1)
        return SignSet((tuple(int(s) for s in row) for row in signs), n_coords=n_hyperplanes)
    raise SamplingFailed(f"could not sample a sign set in {SIGN_SET_RETRIES} attempts")


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def numerical_rank(singular_values: np.ndarray) -> int:
    if singular_values.size == 0:
        return 0
    tol = RANK_RTOL * max(1.0, float(singular_values[0]))
    return int(np.count_nonzero(singular_values > tol))


def spectrum(g: DiGraph) -> Spectrum:
    if g.n == 0:
        return Spectrum(0, 0.0)
    s = np.linalg.svd(g.adjacency(), compute_uv=False)
    return Spectrum(numerical_rank(s), float(s[0]))


# ---------------------------------------------------------------------------
# edge-list format
# ---------------------------------------------------------------------------

def format_edgelist(g: DiGraph) -> str:
    lines = [f"n {g.n}"] + [f"{u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_edgelist(text: str) -> DiGraph:
    n = None
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise EdgeListParseError(f"line {lineno}: expected 'n <N>' header, got {raw!r}")
            n = _parse_int(fields[1], lineno)
            if n < 0:
                raise EdgeListParseError(f"line {lineno}: negative node count")
            continue
        if len(fields) != 2:
            raise EdgeListParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        u, v = _parse_int(fields[0], lineno), _parse_int(fields[1], lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListParseError(f"line {lineno}: edge ({u}, {v}) out of range for n={n}")
        if (u, v) in seen:
            raise EdgeListParseError(f"line {lineno}: duplicate edge ({u}, {v})")
        seen.add((u, v))
        edges.append((u, v))
    if n is None:
        raise EdgeListParseError("missing 'n <N>' header")
    return DiGraph(n, edges)


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise EdgeListParseError(f"line {lineno}: not an integer: {tok!r}") from None


def read_edgelist(path: str | Path) -> DiGraph:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise EdgeListParseError(f"{path}: not 7-bit text") from exc
    return parse_edgelist(text)


def write_edgelist(g: DiGraph, path: str | Path) -> None:
    Path(path).write_text(format_edgelist(g), encoding="ascii")
