"""Exact maximal-clique enumeration on the binarized consistency graph."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from multiclipper.association import AffinityMatrix
from multiclipper.solvers import Clique

DEFAULT_CAP = 64


class GraphTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class ConsistencyGraph:
    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=bool)
        if a.shape != (self.n, self.n):
            raise ValueError("adjacency shape does not match n")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if a.diagonal().any():
            raise ValueError("self-loops are not allowed")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @classmethod
    def from_edges(cls, n: int, edges) -> "ConsistencyGraph":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            a[i, j] = a[j, i] = True
        return cls(n, a)

    def is_clique(self, nodes) -> bool:
        nodes = list(nodes)
        sub = self.adjacency[np.ix_(nodes, nodes)]
        return bool(np.all(sub | np.eye(len(nodes), dtype=bool)))


def binarize(m, threshold: float = 0.5) -> ConsistencyGraph:
    """Edge (i, j) iff i != j and m[i, j] > threshold."""
    m = m.m if isinstance(m, AffinityMatrix) else np.asarray(m, dtype=np.float64)
    a = m > threshold
    np.fill_diagonal(a, False)
    return ConsistencyGraph(m.shape[0], a)


def enumerate_maximal_cliques(g: ConsistencyGraph, cap: int = DEFAULT_CAP) -> list[Clique]:
    """All maximal cliques (Bron-Kerbosch with pivoting), sorted lexicographically.

    Isolated vertices come back as singletons.
    """
    if g.n > cap:
        raise GraphTooLargeError(f"graph has {g.n} nodes, enumeration cap is {cap}")
    # neighbourhoods as int bitsets
    nbr = [sum(1 << int(j) for j in np.flatnonzero(g.adjacency[i])) for i in range(g.n)]
    found: list[Clique] = []

    def bits(x: int):
        while x:
            low = x & -x
            yield low.bit_length() - 1
            x ^= low

    def expand(r: list, p: int, x: int):
        if not p and not x:
            found.append(Clique(tuple(r)))
            return
        pivot = max(bits(p | x), key=lambda u: (p & nbr[u]).bit_count())
        for v in list(bits(p & ~nbr[pivot])):
            expand(r + [v], p & nbr[v], x & nbr[v])
            p &= ~(1 << v)
            x |= 1 << v

    if g.n:
        expand([], (1 << g.n) - 1, 0)
    return sorted(found, key=lambda c: c.indices)


@dataclass
class CoverageReport:
    hit_rate: float
    partial_rate: float
    spurious_rate: float
    n_oracle: int
    n_extracted: int
    hits: list
    partials: list
    spurious: list
    multiplicities: dict

    def to_dict(self) -> dict:
        return {
            "hit_rate": self.hit_rate,
            "partial_rate": self.partial_rate,
            "spurious_rate": self.spurious_rate,
            "n_oracle": self.n_oracle,
            "n_extracted": self.n_extracted,
            "hits": [list(c.indices) for c in self.hits],
            "partials": [list(c.indices) for c in self.partials],
            "spurious": [list(c.indices) for c in self.spurious],
            "multiplicities": [
                {"clique": list(c.indices), "count": k} for c, k in sorted(self.multiplicities.items())
            ],
        }


def coverage_report(extracted, oracle, min_size: int = 2) -> CoverageReport:
    """Compare extracted cliques against the oracle's maximal cliques.

    Rates are over distinct cliques of at least ``min_size`` nodes: an oracle
    clique is a hit if extracted exactly, partial if only a strict subset of
    it was extracted; an extracted clique is spurious if no maximal clique
    contains it.
    """
    counts = Counter(c for c in extracted if len(c) >= min_size)
    ext_sets = {c: frozenset(c.indices) for c in counts}
    all_maximal = [frozenset(c.indices) for c in oracle]
    targets = [c for c in oracle if len(c) >= min_size]

    hits, partials = [], []
    for c in targets:
        cs = frozenset(c.indices)
        if c in counts:
            hits.append(c)
        elif any(e < cs for e in ext_sets.values()):
            partials.append(c)
    spurious = sorted(c for c, e in ext_sets.items() if not any(e <= m for m in all_maximal))
    n_t, n_e = len(targets), len(counts)
    return CoverageReport(
        hit_rate=len(hits) / n_t if n_t else 0.0,
        partial_rate=len(partials) / n_t if n_t else 0.0,
        spurious_rate=len(spurious) / n_e if n_e else 0.0,
        n_oracle=n_t,
        n_extracted=n_e,
        hits=hits,
        partials=partials,
        spurious=spurious,
        multiplicities=dict(counts),
    )


def save_cliques(cliques, path) -> None:
    Path(path).write_text(json.dumps([list(c.indices) for c in cliques]))


def load_cliques(path) -> list[Clique]:
    return [Clique(tuple(c)) for c in json.loads(Path(path).read_text())]
