"""``relembed`` command line.

Exit codes: 0 success, 1 verification failed, 2 usage error, 3 I/O or parse
error, 4 construction error. Errors are reported on one stderr line as
``error: <code>: <detail>``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import compression, constructions, optimize
from .embeddings import (
    DistanceEmbedding,
    SimilarityEmbedding,
    TranslationalEmbedding,
    measure_distance_robustness,
    measure_similarity_robustness,
    verify_distance,
    verify_similarity,
    verify_translational,
)
from .errors import InvalidParams, ParseError, RelembedError
from .formats import dumps, dumps_embedding, load_embedding
from .graph import FAMILIES, format_edgelist, generate, read_edgelist
from .report import build_report, format_table

EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_BUILD = 1, 2, 3, 4


class UsageError(Exception):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    params = {}
    for key in ("n", "m", "p", "deg", "k", "points"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.bidirected:
        params["bidirected"] = True
    g = generate(args.family, seed=args.seed, **params)
    _write(args.output, format_edgelist(g))
    return 0


def _solver_config(args) -> optimize.SolverConfig:
    base = optimize.SolverConfig.from_file(args.config) if args.config else optimize.SolverConfig()
    overrides = {
        "max_rank": args.max_rank,
        "bisection_tolerance": args.tolerance,
        "max_iterations": args.max_iterations,
        "restarts": args.restarts,
        "delta_cap": args.delta_cap,
        "inner_iterations": args.inner_iterations,
        "seed": args.seed,
    }
    values = {f: getattr(base, f) for f in base.__dataclass_fields__}
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_warm_start:
        values["warm_start"] = False
    return optimize.SolverConfig(**values)


def _delta_of(g, e) -> float:
    if isinstance(e, DistanceEmbedding):
        return measure_distance_robustness(g, e).delta
    return measure_similarity_robustness(g, e).delta


def cmd_embed(args) -> int:
    g = read_edgelist(args.graph)
    meta: dict = {"operation": None, "seed": None}
    if args.method == "svd":
        dist, sim = constructions.svd_construct(g)
        e = sim if args.kind == "similarity" else dist
        meta["operation"] = "svd_construct"
    elif args.method == "dag-translational":
        e = constructions.dag_translational(g)
        meta["operation"] = "dag_translational"
    else:
        cfg = _solver_config(args)
        solve = (optimize.max_distance_robustness if args.method == "sdp-distance"
                 else optimize.max_similarity_robustness)
        res = solve(g, cfg)
        e = res.embedding
        meta.update(operation=solve.__name__, seed=cfg.seed, status=res.status.value,
                    residual=res.residual)
    if not isinstance(e, TranslationalEmbedding):
        meta["measured_delta"] = _delta_of(g, e)
    _write(args.output, dumps_embedding(e, meta))
    return 0


def _expect(e, kind, what: str):
    if not isinstance(e, kind):
        raise InvalidParams(f"{what} needs a {kind.__name__}, got {type(e).__name__}")


def cmd_convert(args) -> int:
    g = read_edgelist(args.graph)
    e, _ = load_embedding(args.embedding)
    if args.to == "similarity":
        _expect(e, DistanceEmbedding, "--to similarity")
        delta = args.delta if args.delta is not None else measure_distance_robustness(g, e).delta
        out = constructions.distance_to_similarity(g, e, delta)
        op = "distance_to_similarity"
    elif args.to == "spherical-distance":
        _expect(e, SimilarityEmbedding, "--to spherical-distance")
        out = constructions.similarity_to_spherical_distance(g, e)
        delta = None
        op = "similarity_to_spherical_distance"
    else:
        _expect(e, SimilarityEmbedding, "--to distance")
        delta = args.delta if args.delta is not None else measure_similarity_robustness(g, e).delta
        out = constructions.similarity_to_distance(g, e, delta)
        op = "similarity_to_distance"
    meta = {"operation": op, "seed": None, "input_delta": delta, "measured_delta": _delta_of(g, out)}
    _write(args.output, dumps_embedding(out, meta))
    return 0


def cmd_compress(args) -> int:
    g = read_edgelist(args.graph)
    e, _ = load_embedding(args.embedding)
    if args.method == "jl":
        _expect(e, DistanceEmbedding, "jl")
        out = compression.jl_project(g, e, args.delta, args.seed)
        meta = {"operation": "jl_project", "seed": args.seed, "input_delta": args.delta,
                "measured_delta": _delta_of(g, out)}
    else:
        _expect(e, SimilarityEmbedding, "hamming")
        out = compression.hamming_embed(g, e, args.delta, args.seed, C=args.bits_constant)
        meta = {"operation": "hamming_embed", "seed": args.seed, "input_delta": args.delta,
                "measured_delta": measure_distance_robustness(g, out.as_distance_embedding()).delta}
    _write(args.output, dumps_embedding(out, meta))
    return 0


def cmd_verify(args) -> int:
    g = read_edgelist(args.graph)
    e, _ = load_embedding(args.embedding)
    if isinstance(e, DistanceEmbedding):
        verdict = verify_distance(g, e)
    elif isinstance(e, SimilarityEmbedding):
        verdict = verify_similarity(g, e)
    elif isinstance(e, TranslationalEmbedding):
        verdict = verify_translational(g, e)
    else:
        verdict = verify_distance(g, e.as_distance_embedding())
    if verdict:
        print("valid")
        return 0
    print("invalid")
    u, v = verdict.witness
    print(f"witness: {u} {v}", file=sys.stderr)
    return EXIT_FAIL


def cmd_report(args) -> int:
    g = read_edgelist(args.graph)
    embs = [(str(p), load_embedding(p)[0]) for p in args.embedding or ()]
    report = build_report(g, embs)
    sys.stdout.write(format_table(report) if args.table else dumps(report))
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relembed", description="Embeddings of directed graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a graph as an edge list")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--n", type=int, help="node count (hyperplanes for km families)")
    gen.add_argument("--m", type=int, help="second side size for complete_bipartite")
    gen.add_argument("--p", type=float, help="edge probability")
    gen.add_argument("--deg", type=int, help="degree bound for bounded_degree")
    gen.add_argument("--k", type=int, help="ambient dimension for km families")
    gen.add_argument("--points", type=int, help="sampled points for km families")
    gen.add_argument("--bidirected", action="store_true")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(func=cmd_gen)

    emb = sub.add_parser("embed", help="construct or optimize an embedding")
    emb.add_argument("--method", required=True,
                     choices=("svd", "dag-translational", "sdp-distance", "sdp-similarity"))
    emb.add_argument("--kind", choices=("distance", "similarity"), default="distance",
                     help="which svd output to write")
    emb.add_argument("-g", "--graph", required=True)
    emb.add_argument("-o", "--output", required=True)
    emb.add_argument("--seed", type=int)
    emb.add_argument("--config", help="key=value solver configuration file")
    emb.add_argument("--max-rank", type=int)
    emb.add_argument("--tolerance", type=float)
    emb.add_argument("--max-iterations", type=int)
    emb.add_argument("--restarts", type=int)
    emb.add_argument("--delta-cap", type=float)
    emb.add_argument("--inner-iterations", type=int)
    emb.add_argument("--no-warm-start", action="store_true")
    emb.set_defaults(func=cmd_embed)

    conv = sub.add_parser("convert", help="convert between embedding kinds")
    conv.add_argument("--to", required=True, choices=("similarity", "spherical-distance", "distance"))
    conv.add_argument("-g", "--graph", required=True)
    conv.add_argument("-e", "--embedding", required=True)
    conv.add_argument("-o", "--output", required=True)
    conv.add_argument("--delta", type=float, help="claimed robustness (default: measured)")
    conv.set_defaults(func=cmd_convert)

    comp = sub.add_parser("compress", help="reduce dimension or precision")
    comp.add_argument("--method", required=True, choices=("jl", "hamming"))
    comp.add_argument("--delta", type=float, required=True)
    comp.add_argument("--seed", type=int, required=True)
    comp.add_argument("--bits-constant", type=float, default=compression.HAMMING_C)
    comp.add_argument("-g", "--graph", required=True)
    comp.add_argument("-e", "--embedding", required=True)
    comp.add_argument("-o", "--output", required=True)
    comp.set_defaults(func=cmd_compress)

    ver = sub.add_parser("verify", help="check an embedding against a graph")
    ver.add_argument("-g", "--graph", required=True)
    ver.add_argument("-e", "--embedding", required=True)
    ver.set_defaults(func=cmd_verify)

    rep = sub.add_parser("report", help="spectral bounds and embedding summary")
    rep.add_argument("-g", "--graph", required=True)
    rep.add_argument("-e", "--embedding", action="append")
    fmt = rep.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--table", action="store_true", help="human-readable table")
    rep.set_defaults(func=cmd_report)
    return p


def _fail(code: str, detail, status: int) -> int:
    detail = " ".join(str(detail).split())
    print(f"error: {code}: {detail}", file=sys.stderr)
    return status


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(exc.code, exc, EXIT_USAGE)
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail(exc.code, exc, EXIT_IO)
    except OSError as exc:
        return _fail("IOError", exc, EXIT_IO)
    except RelembedError as exc:
        return _fail(exc.code, exc, EXIT_BUILD)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
