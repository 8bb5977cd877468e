"""JSON embedding files.

Layout (keys in this order)::

    {"kind": "distance" | "similarity" | "translational" | "hamming",
     "n": <nodes>, "dim": <dimension or code length>,
     <vector fields>, <threshold fields>, "metadata": {...}}

Vector fields are row-per-node arrays (``phi_out``/``phi_in``,
``phi_L``/``phi_R``, ``phi`` plus ``z``); Hamming codes are lists of
zero-padded big-endian hex strings (``h_L``/``h_R``) with ``k``,
``dist_threshold`` and ``sim_threshold``. Infinite reals are written as the
string ``"inf"``.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from .compression import HammingEmbedding, bits_to_hex, hex_to_bits
from .embeddings import DistanceEmbedding, SimilarityEmbedding, TranslationalEmbedding
from .errors import EmbeddingFormatError, RelembedError

Embedding = Union[DistanceEmbedding, SimilarityEmbedding, TranslationalEmbedding, HammingEmbedding]


def encode_real(x: float) -> Union[float, str]:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def decode_real(x) -> float:
    if isinstance(x, str):
        if x in ("inf", "-inf", "nan"):
            return float(x)
        raise EmbeddingFormatError(f"not a number: {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise EmbeddingFormatError(f"not a number: {x!r}")
    return float(x)


def jsonable(obj: Any) -> Any:
    """Recursively replace infinities with the string sentinel and numpy scalars with Python ones."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return encode_real(obj)
    return obj


def _rows(M: np.ndarray) -> list:
    return [[float(x) for x in row] for row in M]


def embedding_to_dict(e: Embedding, metadata: dict | None = None) -> dict:
    if isinstance(e, DistanceEmbedding):
        d = {"kind": "distance", "n": e.n, "dim": e.dim,
             "phi_out": _rows(e.phi_out), "phi_in": _rows(e.phi_in)}
        if e.per_source:
            d["thresholds"] = [float(t) for t in e.threshold]
        else:
            d["threshold"] = float(e.threshold)
    elif isinstance(e, SimilarityEmbedding):
        d = {"kind": "similarity", "n": e.n, "dim": e.dim,
             "phi_L": _rows(e.phi_L), "phi_R": _rows(e.phi_R), "threshold": e.threshold}
    elif isinstance(e, TranslationalEmbedding):
        d = {"kind": "translational", "n": e.n, "dim": e.dim, "phi": _rows(e.phi),
             "z": [float(x) for x in e.z], "thresholds": [float(t) for t in e.thresholds]}
    elif isinstance(e, HammingEmbedding):
        d = {"kind": "hamming", "n": e.n, "dim": e.k, "k": e.k,
             "h_L": [bits_to_hex(r) for r in e.h_L], "h_R": [bits_to_hex(r) for r in e.h_R],
             "dist_threshold": e.dist_threshold, "sim_threshold": e.sim_threshold}
    else:
        raise TypeError(f"not an embedding: {type(e).__name__}")
    d["metadata"] = jsonable(metadata or {})
    return d


def _matrix(d: dict, key: str, n: int, dim: int) -> np.ndarray:
    rows = d.get(key)
    if (not isinstance(rows, list) or len(rows) != n
            or any(not isinstance(r, list) or len(r) != dim for r in rows)):
        raise EmbeddingFormatError(f"{key}: expected {n} rows of {dim} numbers")
    return np.array([[decode_real(x) for x in row] for row in rows], dtype=float).reshape(n, dim)


def embedding_from_dict(d: dict) -> tuple[Embedding, dict]:
    try:
        kind = d["kind"]
        n = int(d["n"])
        dim = int(d["dim"])
        meta = d.get("metadata", {})
        if kind == "distance":
            out = _matrix(d, "phi_out", n, dim)
            inn = _matrix(d, "phi_in", n, dim)
            if "thresholds" in d:
                t = np.array([decode_real(x) for x in d["thresholds"]])
            else:
                t = decode_real(d["threshold"])
            return DistanceEmbedding(out, inn, t), meta
        if kind == "similarity":
            return SimilarityEmbedding(_matrix(d, "phi_L", n, dim), _matrix(d, "phi_R", n, dim),
                                       decode_real(d["threshold"])), meta
        if kind == "translational":
            return TranslationalEmbedding(_matrix(d, "phi", n, dim),
                                          np.array([decode_real(x) for x in d["z"]]),
                                          np.array([decode_real(x) for x in d["thresholds"]])), meta
        if kind == "hamming":
            k = int(d["k"])
            L = np.array([hex_to_bits(h, k) for h in d["h_L"]], dtype=np.uint8).reshape(n, k)
            R = np.array([hex_to_bits(h, k) for h in d["h_R"]], dtype=np.uint8).reshape(n, k)
            h = HammingEmbedding(k, L, R, int(d["dist_threshold"]))
            if "sim_threshold" in d and int(d["sim_threshold"]) != h.sim_threshold:
                raise EmbeddingFormatError("sim_threshold inconsistent with dist_threshold")
            return h, meta
    except EmbeddingFormatError:
        raise
    except (KeyError, TypeError, ValueError, RelembedError) as exc:
        raise EmbeddingFormatError(f"malformed embedding: {exc}") from exc
    raise EmbeddingFormatError(f"unknown embedding kind {kind!r}")


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def dumps_embedding(e: Embedding, metadata: dict | None = None) -> str:
    return dumps(embedding_to_dict(e, metadata))


def loads_embedding(text: str) -> tuple[Embedding, dict]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EmbeddingFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise EmbeddingFormatError("embedding file must hold a JSON object")
    return embedding_from_dict(d)


def save_embedding(e: Embedding, path: str | Path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_embedding(e, metadata))


def load_embedding(path: str | Path) -> tuple[Embedding, dict]:
    return loads_embedding(Path(path).read_text())
