"""Graph liftings: clique complexes (simplicial) and chordless-cycle cell complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .complex import CombinatorialComplex, _assemble, empty_complex
from .exceptions import FormatError

__all__ = [
    "InputGraph",
    "clique_lift",
    "cycle_lift",
    "chordless_cycles",
    "lift",
    "parse_edge_list",
    "format_edge_list",
    "read_edge_list",
    "write_edge_list",
]


@dataclass(frozen=True)
class InputGraph:
    """Simple undirected graph on vertices ``0..num_vertices-1``."""

    num_vertices: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.num_vertices < 0:
            raise ValueError("num_vertices must be non-negative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge {e} out of range for {self.num_vertices} vertices")
            key = (min(u, v), max(u, v))
            if key in norm:
                raise ValueError(f"duplicate edge {key}")
            norm.add(key)
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, num_vertices: int, edges) -> InputGraph:
        return cls(num_vertices, frozenset(tuple(e) for e in edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self) -> list[set[int]]:
        adj = [set() for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def relabel(self, perm) -> InputGraph:
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return InputGraph.from_edges(
            self.num_vertices, ((perm[u], perm[v]) for u, v in self.edges)
        )


def clique_lift(g: InputGraph, max_rank: int = 2) -> CombinatorialComplex:
    """Every ``(k+1)``-clique with ``k <= max_rank`` becomes a rank-``k`` simplex."""
    if max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    if g.num_vertices == 0:
        return empty_complex()
    adj = g.neighbors()
    layer = [(v,) for v in range(g.num_vertices)]
    specs = [(c, 0) for c in layer]
    for k in range(1, max_rank + 1):
        # extend each clique by a common neighbour larger than its last vertex
        nxt = []
        for clique in layer:
            common = set.intersection(*(adj[v] for v in clique))
            nxt.extend(clique + (w,) for w in sorted(common) if w > clique[-1])
        if not nxt:
            break
        specs.extend((c, k) for c in nxt)
        layer = nxt
    return _assemble(specs)


def chordless_cycles(g: InputGraph, max_len: int) -> list[tuple[int, ...]]:
    """Induced cycles of length ``3..max_len`` as canonical vertex sequences.

    A cycle is rooted at its smallest vertex; paths only visit larger vertices
    and are pruned as soon as the new vertex would create a chord.
    """
    adj = g.neighbors()
    found: set[tuple[int, ...]] = set()

    def extend(path: list[int], on_path: set[int]) -> None:
        s, u = path[0], path[-1]
        for w in sorted(adj[u]):
            if w <= s or w in on_path:
                continue
            # w may touch only u (and s, which closes the cycle)
            if any(x in adj[w] for x in path[1:-1]):
                continue
            if s in adj[w]:
                if len(path) + 1 >= 3:
                    found.add(_canonical_cycle(path + [w]))
                continue
            if len(path) + 1 < max_len:
                path.append(w)
                on_path.add(w)
                extend(path, on_path)
                on_path.discard(w)
                path.pop()

    for s in range(g.num_vertices):
        for u in sorted(adj[s]):
            if u > s:
                extend([s, u], {s, u})
    return sorted(found, key=lambda c: (len(c), c))


def _canonical_cycle(seq: list[int]) -> tuple[int, ...]:
    n = len(seq)
    best = None
    for direction in (seq, seq[::-1]):
        for i in range(n):
            rot = tuple(direction[i:] + direction[:i])
            if best is None or rot < best:
                best = rot
    return best


def cycle_lift(g: InputGraph, max_cycle_len: int = 6) -> CombinatorialComplex:
    """Vertices, edges, and one rank-2 cell per chordless cycle up to ``max_cycle_len``."""
    if max_cycle_len < 3:
        raise ValueError("max_cycle_len must be >= 3")
    if g.num_vertices == 0:
        return empty_complex()
    specs = [((v,), 0) for v in range(g.num_vertices)]
    specs.extend((e, 1) for e in g.sorted_edges())
    specs.extend((c, 2) for c in chordless_cycles(g, max_cycle_len))
    return _assemble(specs)


def lift(g: InputGraph, mode: str = "clique", max_rank: int = 2, max_cycle_len: int = 6):
    if mode == "clique":
        return clique_lift(g, max_rank)
    if mode == "cycle":
        return cycle_lift(g, max_cycle_len)
    raise ValueError(f"unknown lifting mode {mode!r}")


def parse_edge_list(text: str) -> InputGraph:
    """Parse ``n m`` followed by ``m`` lines of ``u v``."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormatError("empty edge list")
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise FormatError(f"header announces {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"bad edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise FormatError(f"bad edge line {ln!r}") from exc
    try:
        return InputGraph.from_edges(n, edges)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_edge_list(g: InputGraph) -> str:
    edges = g.sorted_edges()
    out = [f"{g.num_vertices} {len(edges)}"]
    out.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"


def read_edge_list(path) -> InputGraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: InputGraph, path) -> None:
    Path(path).write_text(format_edge_list(g))
