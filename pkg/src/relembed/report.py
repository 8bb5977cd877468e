"""Graph/embedding summary used by ``relembed report``.

JSON schema (keys in this order; reals may be the string ``"inf"``)::

    n, edge_count, max_in_degree, max_out_degree, rank, sigma1,
    bound_svd          1 / sigma1 (robustness guaranteed by the SVD construction)
    bound_degree       sqrt(1 / (max_out_degree * max_in_degree))
    embeddings         list of blocks:
        source, kind, dim, valid, threshold,
        measured_delta           (distance, similarity, hamming)
        optimal_delta            (distance, similarity)
        diameter_ratio           (distance with t > 0)
    dimension_upper_bounds
        d_dist, d_sim, d_sign    upper bounds from the embeddings above;
                                 minima are NP-hard and never claimed

The first two blocks are always the SVD construction (distance, similarity).
"""
from __future__ import annotations

import math
from typing import Iterable

from .constructions import svd_construct
from .embeddings import (
    DistanceEmbedding,
    SimilarityEmbedding,
    TranslationalEmbedding,
    diameter_stats,
    measure_distance_robustness,
    measure_similarity_robustness,
    verify_translational,
)
from .formats import Embedding, jsonable
from .graph import DiGraph, spectrum


def embedding_block(g: DiGraph, e: Embedding, source: str) -> dict:
    block: dict = {"source": source}
    if isinstance(e, DistanceEmbedding):
        rob = measure_distance_robustness(g, e)
        block.update(kind="distance", dim=e.dim, valid=rob.valid, threshold=e.threshold,
                     measured_delta=rob.delta, optimal_delta=rob.optimal_delta)
        if e.threshold > 0:
            block["diameter_ratio"] = diameter_stats(e).diameter_ratio
        block["spherical"] = e.is_spherical()
    elif isinstance(e, SimilarityEmbedding):
        rob = measure_similarity_robustness(g, e)
        block.update(kind="similarity", dim=e.dim, valid=rob.valid, threshold=e.threshold,
                     measured_delta=rob.delta, optimal_delta=rob.optimal_delta)
    elif isinstance(e, TranslationalEmbedding):
        block.update(kind="translational", dim=e.dim, valid=verify_translational(g, e).valid,
                     threshold=float(e.thresholds.max()) if e.n else 0.0, uniform=e.uniform)
    else:
        rob = measure_distance_robustness(g, e.as_distance_embedding())
        block.update(kind="hamming", dim=e.k, valid=rob.valid, threshold=e.dist_threshold,
                     measured_delta=rob.delta)
    return block


def _upper_bounds(g: DiGraph, pairs: list[tuple[Embedding, dict]]) -> dict:
    d_dist = math.inf
    d_sim = math.inf
    for e, block in pairs:
        if not block["valid"]:
            continue
        if block["kind"] == "distance":
            d_dist = min(d_dist, e.dim)
            if block.get("spherical"):
                d_sim = min(d_sim, e.dim)
        elif block["kind"] == "similarity":
            d_sim = min(d_sim, e.dim)
        elif block["kind"] == "hamming":
            d_dist = min(d_dist, e.k)
            d_sim = min(d_sim, e.k)
    # dimensions of the two kinds differ by at most one
    d_sim = min(d_sim, d_dist + 1)
    d_dist = min(d_dist, d_sim + 1)
    return {"d_dist": d_dist, "d_sim": d_sim, "d_sign": d_sim + 1}


def build_report(g: DiGraph, embeddings: Iterable[tuple[str, Embedding]] = ()) -> dict:
    sp = spectrum(g)
    dout, din = g.max_out_degree(), g.max_in_degree()
    report = {
        "n": g.n,
        "edge_count": len(g.edges),
        "max_in_degree": din,
        "max_out_degree": dout,
        "rank": sp.rank,
        "sigma1": sp.sigma1,
        "bound_svd": 1.0 / sp.sigma1 if sp.sigma1 > 0 else math.inf,
        "bound_degree": math.sqrt(1.0 / (dout * din)) if dout * din > 0 else math.inf,
    }
    pairs: list[tuple[Embedding, dict]] = []
    if g.n:
        dist, sim = svd_construct(g)
        pairs.append((dist, embedding_block(g, dist, "svd_construct")))
        pairs.append((sim, embedding_block(g, sim, "svd_construct")))
    for source, e in embeddings:
        pairs.append((e, embedding_block(g, e, source)))
    report["embeddings"] = [b for _, b in pairs]
    report["dimension_upper_bounds"] = _upper_bounds(g, pairs)
    return jsonable(report)


def format_table(report: dict) -> str:
    lines = [
        f"nodes           {report['n']}",
        f"edges           {report['edge_count']}",
        f"max in/out deg  {report['max_in_degree']} / {report['max_out_degree']}",
        f"rank            {report['rank']}",
        f"sigma1          {report['sigma1']}",
        f"bound_svd       {report['bound_svd']}",
        f"bound_degree    {report['bound_degree']}",
        "",
        f"{'source':<24}{'kind':<15}{'dim':>6}  {'valid':<6}{'delta':>14}",
    ]
    for b in report["embeddings"]:
        delta = b.get("measured_delta", "-")
        lines.append(f"{b['source']:<24}{b['kind']:<15}{b['dim']:>6}  {str(b['valid']):<6}{str(delta):>14}")
    ub = report["dimension_upper_bounds"]
    lines += ["", f"upper bounds    d_dist <= {ub['d_dist']}, d_sim <= {ub['d_sim']}, d_sign <= {ub['d_sign']}"]
    return "\n".join(lines) + "\n"
