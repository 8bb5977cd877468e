"""Seeded graph corpus shared by the property and acceptance tests."""
from __future__ import annotations

from functools import lru_cache

from relembed import DiGraph, generate

GNP_SIZES = (5, 8, 10, 12, 15, 18, 20, 24, 30, 35, 40)
BOUNDED = [(n, deg) for deg in (1, 2, 3, 4) for n in (6, 10, 16, 22, 30)] + [(40, 3), (40, 4)]


@lru_cache(maxsize=None)
def corpus() -> tuple[tuple[str, DiGraph], ...]:
    """Sixty named graphs: paths and cycles, bidirected K_{m,m}, G(n,p), bounded degree."""
    out = []
    for n in range(3, 9):
        out.append((f"path{n}", generate("path", n=n)))
        out.append((f"cycle{n}", generate("cycle", n=n)))
    for m in range(1, 5):
        out.append((f"K{m},{m}", generate("complete_bipartite", n=m, bidirected=True)))
    for i, n in enumerate(GNP_SIZES):
        for p in (0.1, 0.3):
            out.append((f"gnp{n}_{p}", generate("random_gnp", n=n, p=p, seed=100 + i)))
    for i, (n, deg) in enumerate(BOUNDED):
        out.append((f"bdeg{n}_{deg}", generate("bounded_degree", n=n, deg=deg, seed=200 + i)))
    return tuple(out)


def with_edges():
    return [(name, g) for name, g in corpus() if len(g) > 0]
