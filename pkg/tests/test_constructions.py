import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import corpus
from relembed import (
    DiGraph,
    DistanceEmbedding,
    SimilarityEmbedding,
    dag_translational,
    diameter_stats,
    distance_to_similarity,
    fm_embed,
    generate,
    measure_distance_robustness,
    measure_similarity_robustness,
    similarity_to_distance,
    similarity_to_spherical_distance,
    svd_construct,
    verify_distance,
    verify_similarity,
    verify_translational,
)
from relembed.constructions import distance_to_similarity_bound
from relembed.errors import CyclicGraph, InvalidParams, NotRobust, ZeroThreshold

LOOPY2 = DiGraph(2, [(0, 0), (0, 1), (1, 1)])
SELF2 = DiGraph(2, [(0, 0), (1, 1)])


def power_sigma1(g: DiGraph, iters: int = 3000) -> float:
    """Largest singular value by power iteration on A^T A (no SVD involved)."""
    A = g.adjacency()
    x = np.ones(g.n) / math.sqrt(g.n)
    for _ in range(iters):
        y = A.T @ (A @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
    return math.sqrt(float(x @ (A.T @ (A @ x))))


def loop_distance_delta(g, X, Y, t):
    """Distance robustness by explicit pair loop; None if some edge is too far."""
    worst = math.inf
    for u, v in itertools.product(range(g.n), repeat=2):
        d2 = float(np.sum((X[u] - Y[v]) ** 2))
        if (u, v) in g:
            if d2 > t * t + 1e-9:
                return None
        else:
            worst = min(worst, d2 / (t * t) - 1 if t > 0 else math.inf)
    return worst


def col(*xs):
    return np.array(xs, dtype=float).reshape(-1, 1)


# -- SVD construction -------------------------------------------------------------

def test_svd_single_edge():
    g = DiGraph(2, [(0, 1)])
    d, s = svd_construct(g)
    assert d.threshold == 0.0
    assert np.allclose(d.phi_out[0], d.phi_in[1])
    assert verify_distance(g, d) and measure_distance_robustness(g, d).delta == math.inf


def test_svd_cycle3():
    g = generate("cycle", n=3)
    d, _ = svd_construct(g)
    assert d.threshold == 0.0 and verify_distance(g, d)


def test_svd_bipartite_k33():
    g = generate("complete_bipartite", n=3, bidirected=True)
    d, s = svd_construct(g)
    assert d.dim <= 4
    assert measure_distance_robustness(g, d).delta >= 1 / 3 - 1e-9
    assert measure_similarity_robustness(g, s).delta >= 1 / 3 - 1e-9


def test_svd_empty_edge_set():
    g = DiGraph(3)
    d, s = svd_construct(g)
    assert d.dim == 2 and verify_distance(g, d) and verify_similarity(g, s)


def test_svd_no_nodes():
    with pytest.raises(InvalidParams):
        svd_construct(DiGraph(0))


def test_svd_auxiliary_axes_are_distinct():
    # node 2 has neither in- nor out-edges: sharing one axis would fake a self-edge
    g = DiGraph(3, [(0, 1)])
    d, s = svd_construct(g)
    assert verify_similarity(g, s) and verify_distance(g, d)
    assert d.dim == 1 + 2


@pytest.mark.parametrize("name,g", corpus(), ids=[name for name, _ in corpus()])
def test_svd_guarantee_on_corpus(name, g):
    d, s = svd_construct(g)
    assert d.is_spherical() and s.spherical
    sigma1 = power_sigma1(g)
    bound = 1 / sigma1 if sigma1 > 0 else math.inf
    loop = loop_distance_delta(g, d.phi_out, d.phi_in, d.threshold)
    assert loop is not None and loop >= bound - 1e-6
    assert measure_distance_robustness(g, d).delta >= bound - 1e-6
    assert measure_similarity_robustness(g, s).delta >= bound - 1e-6


# -- FM embedding -----------------------------------------------------------------

def check_fm(n, edges):
    fm = fm_embed(n, edges)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    Delta = max(max((d for _, d in G.degree()), default=0), 1)
    assert fm.Delta == Delta
    for i in range(n):
        assert float(fm.psi[i] @ fm.psi[i]) == pytest.approx(Delta, abs=1e-9)
    for i, j in itertools.combinations(range(n), 2):
        d2 = float(np.sum((fm.psi[i] - fm.psi[j]) ** 2))
        want = 2 * (Delta - 1) if G.has_edge(i, j) else 2 * Delta
        assert d2 == pytest.approx(want, abs=1e-9)
    return fm


def test_fm_path():
    fm = check_fm(3, [(0, 1), (1, 2)])
    assert fm.Delta == 2 and np.sum((fm.psi[0] - fm.psi[2]) ** 2) == pytest.approx(4)


def test_fm_empty_and_triangle():
    assert check_fm(2, []).Delta == 1
    assert check_fm(3, [(0, 1), (1, 2), (0, 2)]).Delta == 2


@given(st.integers(1, 40), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_fm_identities_random(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed % 2**31)
    check_fm(n, list(G.edges()))


# -- DAG translational -------------------------------------------------------------

def brute_translational(g, e):
    for u, v in itertools.permutations(range(g.n), 2):
        near = np.linalg.norm(e.phi[v] - e.phi[u] - e.z) <= e.thresholds[u] + 1e-9
        if near != ((u, v) in g):
            return False
    return True


@pytest.mark.parametrize("g", [generate("path", n=3), DiGraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])])
def test_dag_examples(g):
    e = dag_translational(g)
    assert verify_translational(g, e) and brute_translational(g, e)
    assert e.uniform and e.z[0] == 1.0


def test_dag_cycle_raises():
    with pytest.raises(CyclicGraph):
        dag_translational(generate("cycle", n=3))


@given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_dag_translational_random(n, p, seed):
    g = generate("random_dag", n=n, p=p, seed=seed)
    perm = np.random.default_rng(seed).permutation(n)
    g = g.relabel(perm)
    e = dag_translational(g)
    assert brute_translational(g, e)
    Delta = fm_embed(n, g.undirected_edges()).Delta
    assert e.thresholds[0] == pytest.approx(math.sqrt(2 * Delta - 1))


# -- conversions ----------------------------------------------------------------------

def test_self2_to_spherical_distance():
    e = SimilarityEmbedding(col(1, -1), col(1, -1), 1.0)
    d = similarity_to_spherical_distance(SELF2, e)
    assert d.dim == 2 and d.is_spherical() and verify_distance(SELF2, d)


def test_spherical_t0_keeps_pattern():
    g = generate("cycle", n=4)
    d, s = svd_construct(g)
    s0 = SimilarityEmbedding(s.phi_L, s.phi_R, 0.5)
    out = similarity_to_spherical_distance(g, s0)
    assert verify_distance(g, out)


def test_zero_column_fallback():
    # node 1's dots all equal t, so its row of M - tJ vanishes
    g = DiGraph(2, [(0, 0), (1, 0), (1, 1)])
    e = SimilarityEmbedding(col(1, 0), col(1, -1), 0.0)
    assert verify_similarity(g, e)
    assert verify_distance(g, similarity_to_spherical_distance(g, e))


def test_loopy2_distance_to_similarity():
    e = DistanceEmbedding(col(1, 3), col(0, 2), 1.0)
    s = distance_to_similarity(LOOPY2, e, 8.0)
    bound = 64 / (18 * 81)
    assert distance_to_similarity_bound(8.0, 3.0) == pytest.approx(0.043895747599451304)
    assert s.spherical and s.dim == 2
    assert measure_similarity_robustness(LOOPY2, s).delta >= bound - 1e-9


def test_bound_arithmetic():
    assert distance_to_similarity_bound(0.5, 1.0) == pytest.approx(0.25 / 18)


def test_distance_to_similarity_errors():
    with pytest.raises(ZeroThreshold):
        distance_to_similarity(SELF2, DistanceEmbedding(col(0, 1), col(0, 1), 0.0), 1.0)
    with pytest.raises(NotRobust):
        distance_to_similarity(LOOPY2, DistanceEmbedding(col(1, 3), col(0, 2), 1.0), 9.0)


def test_self2_similarity_to_distance():
    e = SimilarityEmbedding(col(1, -1), col(1, -1), 1.0)
    d = similarity_to_distance(SELF2, e, 2.0)
    assert d.threshold == 0.0 and np.all(d.phi_out[:, 1:] == 0) and np.all(d.phi_in[:, 1:] == 0)
    r = measure_distance_robustness(SELF2, d)
    assert r.delta == math.inf and r.optimal_delta >= 1.0


def test_zero_left_vector_goes_to_axis_e():
    g = DiGraph(2, [(1, 1)])
    e = SimilarityEmbedding(np.array([[0.0], [1.0]]), np.array([[-1.0], [1.0]]), 0.5)
    d = similarity_to_distance(g, e, 0.5)
    assert d.phi_out[0].tolist() == [0.0, 1.0, 0.0]
    assert verify_distance(g, d)


def test_similarity_to_distance_not_robust():
    e = SimilarityEmbedding(col(1, -1), col(1, -1), 1.0)
    with pytest.raises(NotRobust):
        similarity_to_distance(SELF2, e, 2.5)


@pytest.mark.parametrize("name,g", corpus(), ids=[name for name, _ in corpus()])
def test_conversions_on_corpus(name, g):
    d, s = svd_construct(g)
    sph = similarity_to_spherical_distance(g, s)
    assert verify_distance(g, sph) and sph.dim <= s.dim + 1 and sph.is_spherical()

    md = measure_distance_robustness(g, d).delta
    if d.threshold > 0 and math.isfinite(md):
        lifted = distance_to_similarity(g, d, md)
        Delta = diameter_stats(d).scaled_diameter
        bound = md * md / (18 * Delta ** 4)
        assert measure_similarity_robustness(g, lifted).delta >= bound - 1e-9
        c2 = md / (3 * Delta ** 4)
        assert (lifted.dots()[g.edge_mask()] >= 1 - c2 / 2 - 1e-12).all()

    ms = measure_similarity_robustness(g, s).delta
    if math.isfinite(ms):
        out = similarity_to_distance(g, s, ms)
        assert out.dim == s.dim + 2 and out.is_spherical()
        assert measure_distance_robustness(g, out).optimal_delta >= ms / 2 - 1e-9
