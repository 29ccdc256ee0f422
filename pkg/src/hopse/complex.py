"""Combinatorial complexes: a vertex set plus ranked cells with an order-preserving rank."""

from __future__ import annotations

import hashlib
import itertools
from collections import defaultdict
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .exceptions import DuplicateCell, FormatError, OrderViolation, TooLarge

__all__ = [
    "Cell",
    "CombinatorialComplex",
    "build_complex",
    "cells_of_rank",
    "is_isomorphic_bruteforce",
    "read_complex",
    "write_complex",
    "format_complex",
    "parse_complex",
]


@dataclass(frozen=True)
class Cell:
    id: int
    vertices: tuple
    rank: int

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a cell needs at least one vertex")
        if self.rank < 0:
            raise ValueError(f"negative rank {self.rank}")

    @property
    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)


class CombinatorialComplex:
    """Immutable combinatorial complex.

    Cells carry dense integer ids assigned rank-major, then by sorted vertex
    tuple within a rank. Use :func:`build_complex` to construct one.
    """

    __slots__ = ("_vertices", "_cells", "_rank_index", "_lookup", "_by_vertex", "_hash")

    def __init__(self, vertices: Sequence, cells: Sequence[Cell]):
        self._vertices = tuple(vertices)
        self._cells = tuple(cells)
        rank_index: dict[int, list[int]] = defaultdict(list)
        by_vertex: dict[Hashable, list[int]] = defaultdict(list)
        lookup = {}
        for cell in self._cells:
            rank_index[cell.rank].append(cell.id)
            lookup[(cell.vertex_set, cell.rank)] = cell.id
            for v in cell.vertices:
                by_vertex[v].append(cell.id)
        self._rank_index = {r: tuple(ids) for r, ids in sorted(rank_index.items())}
        self._by_vertex = {v: tuple(ids) for v, ids in by_vertex.items()}
        self._lookup = lookup
        self._hash = None

    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def cells(self) -> tuple[Cell, ...]:
        return self._cells

    @property
    def rank_index(self) -> dict[int, tuple[int, ...]]:
        return dict(self._rank_index)

    @property
    def dim(self) -> int:
        """Maximum cell rank, or -1 for the empty complex."""
        return max(self._rank_index, default=-1)

    def __len__(self) -> int:
        return len(self._cells)

    def __getitem__(self, cell_id: int) -> Cell:
        return self._cells[cell_id]

    def rank(self, cell_id: int) -> int:
        return self._cells[cell_id].rank

    def cells_containing(self, vertex) -> tuple[int, ...]:
        return self._by_vertex.get(vertex, ())

    def find(self, vertices: Iterable, rank: int) -> int | None:
        """Id of the cell with this vertex set and rank, if present."""
        return self._lookup.get((frozenset(vertices), rank))

    def n_cells(self, rank: int) -> int:
        return len(self._rank_index.get(rank, ()))

    def cell_specs(self) -> list[tuple[tuple, int]]:
        return [(c.vertices, c.rank) for c in self._cells]

    def content_hash(self) -> str:
        """sha256 over the canonical text form; stable across runs."""
        if self._hash is None:
            self._hash = hashlib.sha256(format_complex(self).encode()).hexdigest()
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, CombinatorialComplex):
            return NotImplemented
        return self._vertices == other._vertices and self._cells == other._cells

    def __hash__(self) -> int:
        return hash(self._cells)

    def __repr__(self) -> str:
        counts = ", ".join(f"{r}: {len(ids)}" for r, ids in self._rank_index.items())
        return f"CombinatorialComplex(n_vertices={len(self._vertices)}, cells={{{counts}}})"


def build_complex(cell_specs: Iterable[tuple[Iterable, int]]) -> CombinatorialComplex:
    """Validate ``(vertex-set, rank)`` pairs and return a complex.

    Missing rank-0 singletons are inserted for every vertex mentioned. The
    same vertex set may appear at two ranks; an exact repeat raises
    :class:`DuplicateCell`. Any strict inclusion ``s < t`` with
    ``rank(s) > rank(t)`` raises :class:`OrderViolation`.
    """
    specs = list(cell_specs)
    if not specs:
        raise ValueError("cell_specs must be non-empty")
    return _assemble(specs)


def _assemble(specs) -> CombinatorialComplex:
    seen: set[tuple[frozenset, int]] = set()
    entries: list[tuple[int, tuple, frozenset]] = []
    vertices: set = set()
    for verts, rank in specs:
        vs = frozenset(verts)
        rank = int(rank)
        if not vs:
            raise ValueError("empty vertex set")
        if rank < 0:
            raise ValueError(f"negative rank {rank}")
        key = (vs, rank)
        if key in seen:
            raise DuplicateCell(f"cell {sorted(vs)} appears twice at rank {rank}")
        seen.add(key)
        entries.append((rank, tuple(sorted(vs)), vs))
        vertices |= vs
    for v in vertices:
        key = (frozenset((v,)), 0)
        if key not in seen:
            seen.add(key)
            entries.append((0, (v,), key[0]))
    entries.sort(key=lambda e: (e[0], e[1]))
    cells = [Cell(i, verts, rank) for i, (rank, verts, _) in enumerate(entries)]
    cc = CombinatorialComplex(sorted(vertices), cells)
    _check_order(cc)
    return cc


def _check_order(cc: CombinatorialComplex) -> None:
    # candidates for sub ⊂ cell share at least one vertex with it
    for cell in cc.cells:
        vs = cell.vertex_set
        candidates = set()
        for v in cell.vertices:
            candidates.update(cc.cells_containing(v))
        for cid in candidates:
            sub = cc[cid]
            if sub.rank > cell.rank and len(sub.vertices) < len(vs) and sub.vertex_set < vs:
                raise OrderViolation(
                    f"{list(sub.vertices)} (rank {sub.rank}) is contained in "
                    f"{list(cell.vertices)} (rank {cell.rank})"
                )


def empty_complex() -> CombinatorialComplex:
    return CombinatorialComplex((), ())


def cells_of_rank(cc: CombinatorialComplex, r: int) -> list[int]:
    if r < 0:
        raise ValueError("rank must be non-negative")
    return list(cc._rank_index.get(r, ()))


def is_isomorphic_bruteforce(
    cc1: CombinatorialComplex, cc2: CombinatorialComplex, max_vertices: int = 8
) -> bool:
    """Exhaustive check over vertex bijections; only for small test instances."""
    n = len(cc1.vertices)
    if n > max_vertices or len(cc2.vertices) > max_vertices:
        raise TooLarge(f"isomorphism check capped at {max_vertices} vertices")
    if n != len(cc2.vertices) or len(cc1) != len(cc2):
        return False
    if {r: len(ids) for r, ids in cc1._rank_index.items()} != {
        r: len(ids) for r, ids in cc2._rank_index.items()
    }:
        return False
    target = {(c.vertex_set, c.rank) for c in cc2.cells}
    src = cc1.vertices
    for image in itertools.permutations(cc2.vertices):
        mapping = dict(zip(src, image))
        if all(
            (frozenset(mapping[v] for v in c.vertices), c.rank) in target for c in cc1.cells
        ):
            return True
    return False


def format_complex(cc: CombinatorialComplex) -> str:
    lines = ["# rank<TAB>vertices"]
    for c in cc.cells:
        lines.append(f"{c.rank}\t{','.join(str(v) for v in c.vertices)}")
    return "\n".join(lines) + "\n"


def parse_complex(text: str) -> CombinatorialComplex:
    specs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rank_s, verts_s = line.split("\t") if "\t" in line else line.split(None, 1)
            rank = int(rank_s)
            verts = [int(v) for v in verts_s.split(",")]
        except ValueError as exc:
            raise FormatError(f"line {lineno}: cannot parse {raw!r}") from exc
        if rank < 0 or any(v < 0 for v in verts):
            raise FormatError(f"line {lineno}: ranks and vertices must be non-negative")
        specs.append((verts, rank))
    if not specs:
        return empty_complex()
    return _assemble(specs)


def write_complex(cc: CombinatorialComplex, path) -> None:
    Path(path).write_text(format_complex(cc))


def read_complex(path) -> CombinatorialComplex:
    return parse_complex(Path(path).read_text())
