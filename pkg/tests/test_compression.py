import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relembed import (
    DiGraph,
    DistanceEmbedding,
    SimilarityEmbedding,
    generate,
    hamming_embed,
    jl_project,
    jl_target_dim,
    measure_distance_robustness,
    measure_similarity_robustness,
    svd_construct,
    verify_distance,
    verify_similarity,
)
from relembed.compression import (
    HammingEmbedding,
    bits_to_hex,
    halfspace_disagreement,
    hamming_bits,
    hex_to_bits,
)
from relembed.errors import InvalidParams, NotRobust, NotSpherical, RetriesExhausted

SELF2 = DiGraph(2, [(0, 0), (1, 1)])


def padded(e: DistanceEmbedding, dim: int) -> DistanceEmbedding:
    extra = dim - e.dim
    return DistanceEmbedding(np.pad(e.phi_out, ((0, 0), (0, extra))),
                             np.pad(e.phi_in, ((0, 0), (0, extra))), e.threshold)


# -- JL ----------------------------------------------------------------------------

def test_target_dim_example():
    # eps = 0.1: 4 ln 1024 / (0.005 - 0.001/3) = 5941.2...
    assert jl_target_dim(16, 0.8) == 5942


@given(st.integers(1, 500), st.floats(0.01, 11.9))
def test_target_dim_formula(n, delta):
    eps = delta / 8
    want = math.ceil(4 * math.log(4 * n * n) / (eps ** 2 / 2 - eps ** 3 / 3))
    assert jl_target_dim(n, delta) == max(1, want)


def test_target_dim_degenerate():
    assert jl_target_dim(10, math.inf) is None
    assert jl_target_dim(10, 12.0) is None


def test_jl_skips_when_dimension_small():
    g = generate("bounded_degree", n=10, deg=3, seed=1)
    d, _ = svd_construct(g)
    delta = measure_distance_robustness(g, d).delta
    assert jl_project(g, d, delta, seed=0) is d


def test_jl_projects_and_keeps_half_robustness():
    g = generate("bounded_degree", n=16, deg=2, seed=207)
    d, _ = svd_construct(g)
    delta = measure_distance_robustness(g, d).delta
    m = jl_target_dim(g.n, delta)
    big = padded(d, m + 50)
    out = jl_project(g, big, delta, seed=3)
    assert out.dim == m and verify_distance(g, out)
    assert measure_distance_robustness(g, out).delta >= delta / 2
    again = jl_project(g, big, delta, seed=3)
    assert np.array_equal(out.phi_out, again.phi_out) and np.array_equal(out.phi_in, again.phi_in)


def test_jl_rejects_unrobust_input():
    g = generate("bounded_degree", n=10, deg=3, seed=1)
    d, _ = svd_construct(g)
    delta = measure_distance_robustness(g, d).delta
    with pytest.raises(NotRobust):
        jl_project(g, d, 2 * delta, seed=0)


def test_jl_retries_exhausted():
    g = generate("bounded_degree", n=10, deg=3, seed=1)
    d, _ = svd_construct(g)
    delta = measure_distance_robustness(g, d).delta
    with pytest.raises(RetriesExhausted):
        jl_project(g, padded(d, jl_target_dim(g.n, delta) + 1), delta, seed=0, max_retries=0)


# -- Hamming ---------------------------------------------------------------------------

def test_bits_formula():
    assert hamming_bits(2, 2.0) == math.ceil(64 * math.log(3) / 4)
    assert hamming_bits(9, 0.5) == math.ceil(64 * math.log(10) / 0.25)


def test_self2_codes_are_identical_or_complementary():
    e = SimilarityEmbedding([[1.0], [-1.0]], [[1.0], [-1.0]], 1.0)
    h = hamming_embed(SELF2, e, 2.0, seed=0)
    D = h.hamming_distances()
    assert D[0, 0] == 0 and D[1, 1] == 0 and D[0, 1] == h.k and D[1, 0] == h.k
    assert np.array_equal(h.predicted_edges(), SELF2.edge_mask())


def test_no_nonedges_any_codes_pass():
    g = generate("bidirected_complete_with_loops", n=3)
    _, s = svd_construct(g)
    h = hamming_embed(g, s, 1.0, seed=0)
    assert h.predicted_edges().all()


def test_hamming_bounded_degree_64():
    g = generate("bounded_degree", n=64, deg=3, seed=11)
    _, s = svd_construct(g)
    delta = measure_similarity_robustness(g, s).delta
    h = hamming_embed(g, s, delta, seed=5)
    assert h.k == hamming_bits(64, delta)
    assert verify_distance(g, h.as_distance_embedding())
    assert verify_similarity(g, h.as_similarity_embedding())


@pytest.mark.parametrize("seed", range(5))
def test_hamming_margins_and_determinism(seed):
    g = generate("bounded_degree", n=20, deg=3, seed=seed)
    _, s = svd_construct(g)
    delta = measure_similarity_robustness(g, s).delta
    h = hamming_embed(g, s, delta, seed=seed)
    a = math.acos(s.threshold - delta)
    D = h.hamming_distances()
    E = g.edge_mask()
    assert (D[E] <= h.k * (a - 2 * delta / 3) / math.pi).all()
    assert (D[~E] >= h.k * (a - delta / 3) / math.pi).all()
    assert h.dist_threshold == round(h.k * (a - delta / 2) / math.pi)
    h2 = hamming_embed(g, s, delta, seed=seed)
    assert np.array_equal(h.h_L, h2.h_L) and np.array_equal(h.h_R, h2.h_R)


def test_hamming_requires_sphere_and_robustness():
    e = SimilarityEmbedding([[2.0], [-2.0]], [[1.0], [-1.0]], 1.0)
    with pytest.raises(NotSpherical):
        hamming_embed(SELF2, e, 1.0, seed=0)
    e = SimilarityEmbedding([[1.0], [-1.0]], [[1.0], [-1.0]], 1.0)
    with pytest.raises(NotRobust):
        hamming_embed(SELF2, e, 2.5, seed=0)


def test_partial_converse():
    # integer Hamming distances: non-edges sit at least one bit past the cut
    g = generate("bounded_degree", n=12, deg=2, seed=3)
    _, s = svd_construct(g)
    delta = measure_similarity_robustness(g, s).delta
    h = hamming_embed(g, s, delta, seed=1)
    assert measure_distance_robustness(g, h.as_distance_embedding()).delta >= 1 / h.k


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, math.pi / 2, 2.5, math.pi])
def test_disagreement_matches_angle(theta):
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([math.cos(theta), math.sin(theta), 0.0])
    assert abs(halfspace_disagreement(x, y, 10_000, seed=7) - theta / math.pi) < 0.02


def test_hamming_embedding_validation():
    with pytest.raises(InvalidParams):
        HammingEmbedding(3, [[0, 1]], [[0, 1]], 1)
    with pytest.raises(InvalidParams):
        HammingEmbedding(2, [[0, 2]], [[0, 1]], 1)
    with pytest.raises(InvalidParams):
        HammingEmbedding(2, [[0, 1]], [[0, 1]], 3)


# -- hex codes ----------------------------------------------------------------------------

def test_hex_big_endian_zero_padded():
    assert bits_to_hex([0, 0, 0, 1]) == "1"
    assert bits_to_hex([1, 0, 0, 0, 0]) == "10"
    assert bits_to_hex([0, 0, 0, 0, 0, 1]) == "01"


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_hex_roundtrip(bits):
    text = bits_to_hex(bits)
    assert len(text) == math.ceil(len(bits) / 4)
    assert hex_to_bits(text, len(bits)).tolist() == bits


def test_hex_overflow():
    with pytest.raises(InvalidParams):
        hex_to_bits("ff", 4)
