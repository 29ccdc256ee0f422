"""Counting neighborhood functions and message-passing routes on rank-``R`` complexes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .exceptions import RouteOverflow, TooLarge
from .neighborhoods import Incidence, NeighborhoodFunction

__all__ = [
    "Route",
    "count_neighborhoods",
    "count_minimal_routes",
    "count_extended_routes",
    "enumerate_minimal_routes",
    "MAX_ENUMERATION_RANK",
]

MAX_ENUMERATION_RANK = 6


@dataclass(frozen=True)
class Route:
    steps: tuple[NeighborhoodFunction, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def targets(self) -> list[int]:
        return [nf.target_rank for nf in self.steps]

    def __str__(self) -> str:
        return "[" + ", ".join(nf.label for nf in self.steps) + "]"


def _check(value: int, width: int | None) -> int:
    if width is not None and value.bit_length() > width:
        raise RouteOverflow(f"{value} does not fit in {width} unsigned bits")
    return value


def _check_rank(R: int) -> None:
    if R < 0:
        raise ValueError("R must be non-negative")


def count_neighborhoods(R: int, width: int | None = None) -> int:
    _check_rank(R)
    return _check(2 * (R + 1) * R, width)


def count_minimal_routes(R: int, width: int | None = None) -> int:
    _check_rank(R)
    return _check(math.factorial(R + 1), width)


def count_extended_routes(R: int, width: int | None = None) -> int:
    """Minimal routes followed by one adjacency per rank, in any combination."""
    _check_rank(R)
    return _check(math.factorial(R + 1) * (R + 1) ** R, width)


def enumerate_minimal_routes(R: int) -> list[Route]:
    """One closed incidence cycle per permutation of the ranks ``0..R``.

    At ``R == 0`` there are no incidences; the single returned route is empty.
    """
    _check_rank(R)
    if R > MAX_ENUMERATION_RANK:
        raise TooLarge(f"enumeration capped at R={MAX_ENUMERATION_RANK}")
    if R == 0:
        return [Route(())]
    routes = []
    for perm in itertools.permutations(range(R + 1)):
        steps = [Incidence(perm[j - 1], perm[j]) for j in range(1, R + 1)]
        steps.append(Incidence(perm[R], perm[0]))
        routes.append(Route(tuple(steps)))
    return routes
