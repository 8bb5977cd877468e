import json
import math

import numpy as np
import pytest

from relembed import (
    DistanceEmbedding,
    SimilarityEmbedding,
    TranslationalEmbedding,
    generate,
    hamming_embed,
    measure_similarity_robustness,
    svd_construct,
)
from relembed.compression import HammingEmbedding
from relembed.errors import EmbeddingFormatError
from relembed.formats import dumps_embedding, jsonable, loads_embedding


def roundtrip(e, meta=None):
    text = dumps_embedding(e, meta)
    assert text.endswith("\n")
    back, got_meta = loads_embedding(text)
    assert dumps_embedding(back, got_meta) == text
    return back, text


def test_distance_roundtrip_and_key_order():
    e = DistanceEmbedding([[0.1, 0.2]], [[1.0, -3.5]], 0.75)
    back, text = roundtrip(e, {"operation": "x", "seed": None, "measured_delta": math.inf})
    d = json.loads(text)
    assert list(d) == ["kind", "n", "dim", "phi_out", "phi_in", "threshold", "metadata"]
    assert d["metadata"]["measured_delta"] == "inf"
    assert np.array_equal(back.phi_in, e.phi_in) and back.threshold == 0.75


def test_per_source_roundtrip():
    e = DistanceEmbedding([[0.0], [1.0]], [[1.0], [0.0]], [0.5, 1.5])
    back, text = roundtrip(e)
    assert "thresholds" in json.loads(text) and back.per_source


def test_similarity_and_translational_roundtrip():
    back, _ = roundtrip(SimilarityEmbedding([[1.0, 0.0]], [[0.0, 1.0]], -0.25))
    assert back.threshold == -0.25
    e = TranslationalEmbedding([[0.0, 1.0], [1.0, 1.0]], [1.0, 0.0], [0.5, 0.5])
    back, text = roundtrip(e)
    assert list(json.loads(text))[:6] == ["kind", "n", "dim", "phi", "z", "thresholds"]


def test_zero_dim_roundtrip():
    back, _ = roundtrip(DistanceEmbedding(np.zeros((2, 0)), np.zeros((2, 0)), 0.0))
    assert back.dim == 0 and back.n == 2


def test_hamming_roundtrip():
    g = generate("bounded_degree", n=8, deg=2, seed=1)
    _, s = svd_construct(g)
    h = hamming_embed(g, s, measure_similarity_robustness(g, s).delta, seed=2)
    back, text = roundtrip(h)
    d = json.loads(text)
    assert all(len(x) == math.ceil(h.k / 4) for x in d["h_L"])
    assert np.array_equal(back.h_L, h.h_L) and back.dist_threshold == h.dist_threshold


def test_hamming_inconsistent_sim_threshold():
    h = HammingEmbedding(4, [[0, 1, 0, 1]], [[1, 1, 0, 0]], 2)
    d = json.loads(dumps_embedding(h))
    d["sim_threshold"] = 3
    with pytest.raises(EmbeddingFormatError):
        loads_embedding(json.dumps(d))


@pytest.mark.parametrize("text", [
    "not json",
    "[1, 2]",
    '{"kind": "cube", "n": 1, "dim": 1}',
    '{"kind": "distance", "n": 1, "dim": 1, "phi_out": [[0]], "threshold": 1}',
    '{"kind": "distance", "n": 1, "dim": 2, "phi_out": [[0]], "phi_in": [[0]], "threshold": 1}',
    '{"kind": "distance", "n": 1, "dim": 1, "phi_out": [["a"]], "phi_in": [[0]], "threshold": 1}',
    '{"kind": "translational", "n": 1, "dim": 1, "phi": [[0]], "z": [2], "thresholds": [1]}',
])
def test_malformed(text):
    with pytest.raises(EmbeddingFormatError):
        loads_embedding(text)


def test_jsonable():
    out = jsonable({"a": np.float64(math.inf), "b": np.int64(3), "c": np.array([1.5]), "d": np.bool_(True)})
    assert out == {"a": "inf", "b": 3, "c": [1.5], "d": True}
    assert json.dumps(out)
