"""Incidence/adjacency neighborhoods and the strictly augmented Hasse graphs they induce.

Adjacency subscripts read ``A_{t,s}``: rank-``t`` cells related through shared
rank-``s`` cells, so ``A_{0,1}`` is the ordinary node adjacency of a graph.
Incidence ``I_{s->t}`` maps a rank-``t`` cell to the rank-``s`` cells it
contains (``s < t``) or is contained in (``s > t``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .complex import CombinatorialComplex
from .exceptions import RankMismatch, UnknownSet

__all__ = [
    "Incidence",
    "Adjacency",
    "NeighborhoodFunction",
    "HasseGraph",
    "incidence",
    "adjacency",
    "neighborhood",
    "hasse_graph",
    "taxonomy_set",
    "rank_targeted",
    "all_neighborhoods",
    "parse_neighborhood",
    "parse_neighborhoods",
    "TAXONOMY",
]


@dataclass(frozen=True, order=True)
class Incidence:
    source: int
    target: int

    def __post_init__(self):
        if self.source < 0 or self.target < 0:
            raise ValueError("ranks must be non-negative")
        if self.source == self.target:
            raise ValueError("an incidence needs two distinct ranks")

    @property
    def target_rank(self) -> int:
        return self.target

    @property
    def label(self) -> str:
        return f"I_{self.source}->{self.target}"

    @property
    def slug(self) -> str:
        return f"I_{self.source}_to_{self.target}"

    def ranks(self) -> tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True, order=True)
class Adjacency:
    target: int
    via: int

    def __post_init__(self):
        if self.target < 0 or self.via < 0:
            raise ValueError("ranks must be non-negative")
        if self.target == self.via:
            raise ValueError("an adjacency needs a mediating rank different from its own")

    @property
    def target_rank(self) -> int:
        return self.target

    @property
    def label(self) -> str:
        return f"A_{self.target},{self.via}"

    @property
    def slug(self) -> str:
        return f"A_{self.target}_{self.via}"

    def ranks(self) -> tuple[int, int]:
        return (self.target, self.via)


NeighborhoodFunction = Incidence | Adjacency

_A = Adjacency
_I = Incidence

TAXONOMY: dict[str, tuple[NeighborhoodFunction, ...]] = {
    "Adj-1": (_A(0, 1),),
    "Adj-2": (_A(0, 1), _A(1, 2)),
    "Adj-3": (_A(0, 1), _A(1, 2), _A(2, 1)),
    "Inc-1": (_A(0, 1), _I(0, 1), _I(1, 2)),
    "Inc-2": (_A(0, 1), _I(1, 0), _I(2, 1)),
    "Inc-3": (_A(0, 1), _I(0, 1), _I(1, 2), _I(1, 0), _I(2, 1)),
    "Mix-1": (_A(0, 1), _A(1, 2), _A(1, 0), _A(2, 1), _I(0, 1), _I(1, 2), _I(1, 0), _I(2, 1)),
    "Mix-2": (_A(0, 1), _A(1, 2), _A(0, 2), _A(1, 0), _A(2, 1), _A(2, 0)),
}


def taxonomy_set(name: str) -> list[NeighborhoodFunction]:
    try:
        return list(TAXONOMY[name])
    except KeyError:
        raise UnknownSet(f"unknown neighborhood set {name!r}; choose from {sorted(TAXONOMY)}") from None


def rank_targeted(nfs, r: int) -> list[NeighborhoodFunction]:
    return [nf for nf in nfs if nf.target_rank == r]


def all_neighborhoods(max_rank: int) -> list[NeighborhoodFunction]:
    """Every incidence and adjacency available on a complex of dimension ``max_rank``."""
    ranks = range(max_rank + 1)
    out: list[NeighborhoodFunction] = [Incidence(s, t) for s in ranks for t in ranks if s != t]
    out += [Adjacency(t, s) for t in ranks for s in ranks if s != t]
    return out


_NF_RE = re.compile(r"^\s*([AI])_?\{?(\d+)\s*(,|->|→|_to_|_)\s*(\d+)\}?\s*$")


def parse_neighborhood(text: str) -> NeighborhoodFunction:
    """Parse ``A_0,1`` / ``A0,1`` / ``I_0->1`` / ``I0->1`` (slugs also accepted)."""
    m = _NF_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse neighborhood {text!r}")
    kind, a, _, b = m.groups()
    a, b = int(a), int(b)
    return Adjacency(a, b) if kind == "A" else Incidence(a, b)


def parse_neighborhoods(spec: str) -> list[NeighborhoodFunction]:
    """A taxonomy name, or a ``;``-separated list of neighborhoods."""
    if spec in TAXONOMY:
        return taxonomy_set(spec)
    parts = [p for p in spec.split(";") if p.strip()]
    if not parts:
        raise UnknownSet(f"empty neighborhood spec {spec!r}")
    try:
        return [parse_neighborhood(p) for p in parts]
    except ValueError:
        raise UnknownSet(f"unknown neighborhood set {spec!r}") from None


def _check_rank(cc: CombinatorialComplex, sigma: int, t: int) -> None:
    if cc.rank(sigma) != t:
        raise RankMismatch(f"cell {sigma} has rank {cc.rank(sigma)}, expected {t}")


def _incident(cc: CombinatorialComplex, sigma: int, s: int) -> set[int]:
    cell = cc[sigma]
    vs = cell.vertex_set
    if s > cell.rank:
        # strict supersets all contain the first vertex
        return {
            cid
            for cid in cc.cells_containing(cell.vertices[0])
            if cc[cid].rank == s and vs < cc[cid].vertex_set
        }
    out = set()
    for v in cell.vertices:
        for cid in cc.cells_containing(v):
            c = cc[cid]
            if c.rank == s and c.vertex_set < vs:
                out.add(cid)
    return out


def incidence(cc: CombinatorialComplex, nf: Incidence, sigma: int) -> set[int]:
    _check_rank(cc, sigma, nf.target)
    return _incident(cc, sigma, nf.source)


def adjacency(
    cc: CombinatorialComplex, nf: Adjacency, sigma: int, include_self: bool = False
) -> set[int]:
    _check_rank(cc, sigma, nf.target)
    out = set()
    for delta in _incident(cc, sigma, nf.via):
        out |= _incident(cc, delta, nf.target)
    if not include_self:
        out.discard(sigma)
    return out


def neighborhood(cc, nf: NeighborhoodFunction, sigma: int, include_self: bool = False) -> set[int]:
    if isinstance(nf, Incidence):
        return incidence(cc, nf, sigma)
    return adjacency(cc, nf, sigma, include_self)


@dataclass(frozen=True)
class HasseGraph:
    """Directed graph over cells; an arc ``(tau, sigma)`` means ``tau`` is in N(sigma)."""

    nodes: tuple[int, ...]
    arcs: tuple[tuple[int, int], ...]
    target_cells: tuple[int, ...]
    origin: NeighborhoodFunction

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def index(self) -> dict[int, int]:
        return {c: i for i, c in enumerate(self.nodes)}

    @cached_property
    def target_positions(self) -> np.ndarray:
        idx = self.index
        return np.array([idx[c] for c in self.target_cells], dtype=np.intp)

    def arc_index_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(tail, head) node positions of every arc."""
        idx = self.index
        if not self.arcs:
            empty = np.zeros(0, dtype=np.intp)
            return empty, empty
        tails = np.fromiter((idx[a] for a, _ in self.arcs), dtype=np.intp, count=len(self.arcs))
        heads = np.fromiter((idx[b] for _, b in self.arcs), dtype=np.intp, count=len(self.arcs))
        return tails, heads

    def adjacency_matrix(self, symmetric: bool = True) -> np.ndarray:
        """Dense 0/1 matrix; ``A[i, j] = 1`` for an arc from node i to node j."""
        n = self.n_nodes
        a = np.zeros((n, n))
        tails, heads = self.arc_index_pairs()
        a[tails, heads] = 1.0
        if symmetric:
            a[heads, tails] = 1.0
        return a

    def permuted(self, cell_perm) -> HasseGraph:
        """Same graph with cell ids renamed by ``cell_perm`` (used in equivariance tests)."""
        nodes = tuple(sorted(cell_perm[c] for c in self.nodes))
        arcs = tuple(sorted((cell_perm[a], cell_perm[b]) for a, b in self.arcs))
        targets = tuple(sorted(cell_perm[c] for c in self.target_cells))
        return HasseGraph(nodes, arcs, targets, self.origin)


def hasse_graph(
    cc: CombinatorialComplex, nf: NeighborhoodFunction, include_self: bool = False
) -> HasseGraph:
    t = nf.target_rank
    arcs = []
    for sigma in cc.rank_index.get(t, ()):
        for tau in neighborhood(cc, nf, sigma, include_self):
            arcs.append((tau, sigma))
    arcs.sort()
    nodes = sorted({c for arc in arcs for c in arc})
    targets = [c for c in nodes if cc.rank(c) == t]
    return HasseGraph(tuple(nodes), tuple(arcs), tuple(targets), nf)
