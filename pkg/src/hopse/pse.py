"""Positional and structural encodings (PSEs) of Hasse graphs.

Every channel symmetrizes the Hasse arcs, computes over all Hasse nodes, and
returns rows for the graph's target cells only. The array-level functions
(``*_from_adjacency``) take a dense symmetric 0/1 matrix and return one row
per node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .exceptions import EmptyGraph
from .neighborhoods import HasseGraph, NeighborhoodFunction

__all__ = [
    "PseKind",
    "EncodingMatrix",
    "LAP",
    "RWSE",
    "HK",
    "ELSTATIC",
    "ELSTATIC_DIM",
    "parse_pse",
    "parse_pse_list",
    "laplacian",
    "lap_pe_from_adjacency",
    "rwse_from_adjacency",
    "hk_diag_from_adjacency",
    "elstatic_from_adjacency",
    "lap_pe",
    "rwse",
    "hk_diag",
    "elstatic_pe",
    "encode",
]

LAP = "LapPE"
RWSE = "RWSE"
HK = "HKdiagSE"
ELSTATIC = "ElstaticPE"
ELSTATIC_DIM = 7

_DEFAULTS = {LAP: 4, RWSE: 16, HK: 16, ELSTATIC: ELSTATIC_DIM}
_ALIASES = {
    "lap": LAP, "lappe": LAP,
    "rwse": RWSE, "rw": RWSE,
    "hk": HK, "hkdiag": HK, "hkdiagse": HK,
    "elstatic": ELSTATIC, "elstaticpe": ELSTATIC, "es": ELSTATIC,
}
ZERO_EIG_RTOL = 1e-8


@dataclass(frozen=True)
class PseKind:
    """Channel tag plus its size parameter (eigenvector count, horizon, or 7)."""

    tag: str
    param: int | None = None
    directed: bool = False

    def __post_init__(self):
        if self.tag not in _DEFAULTS:
            raise ValueError(f"unknown PSE kind {self.tag!r}")
        if self.param is None:
            object.__setattr__(self, "param", _DEFAULTS[self.tag])
        if self.tag == ELSTATIC and self.param != ELSTATIC_DIM:
            raise ValueError(f"ElstaticPE has exactly {ELSTATIC_DIM} statistics")
        if self.param < 1:
            raise ValueError(f"{self.tag} parameter must be >= 1")
        if self.directed and self.tag != RWSE:
            raise ValueError("only RWSE supports a directed walk")

    @property
    def width(self) -> int:
        return self.param

    def spec(self) -> str:
        name = {LAP: "lap:i", RWSE: "rwse:K", HK: "hk:K"}.get(self.tag)
        if name is None:
            return "elstatic"
        s = f"{name}={self.param}"
        return s + "!directed" if self.directed else s


_PSE_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?::\s*(?:[A-Za-z]+\s*=\s*)?(\d+))?\s*(!directed)?\s*$")


def parse_pse(text: str) -> PseKind:
    """``rwse:K=16``, ``lap:i=4``, ``hk:K=8``, ``elstatic``; ``rwse:K=8!directed``."""
    m = _PSE_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse PSE spec {text!r}")
    name, param, directed = m.groups()
    tag = _ALIASES.get(name.lower())
    if tag is None:
        raise ValueError(f"unknown PSE kind {name!r}")
    return PseKind(tag, int(param) if param else None, bool(directed))


def parse_pse_list(text: str) -> list[PseKind]:
    """Comma-separated channel specs, e.g. ``rwse:K=16,lap:i=4``."""
    return [parse_pse(p) for p in text.split(",") if p.strip()]


@dataclass(frozen=True, eq=False)
class EncodingMatrix:
    rows: tuple[int, ...]
    values: np.ndarray
    kind: PseKind
    origin: NeighborhoodFunction | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def laplacian(adj: np.ndarray) -> np.ndarray:
    return np.diag(adj.sum(axis=1)) - adj


def _components(adj) -> tuple[int, np.ndarray]:
    return connected_components(sp.csr_matrix(adj), directed=False)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > 1e-8)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def lap_pe_from_adjacency(adj: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``i`` nontrivial Laplacian eigenvectors, zero-padded, and their eigenvalues.

    One zero eigenvalue per connected component is skipped. Returned
    eigenvalues are NaN in padded slots.
    """
    n = adj.shape[0]
    w, v = np.linalg.eigh(laplacian(adj))
    n_comp, _ = _components(adj)
    lam_max = w[-1] if n else 0.0
    keep = [j for j in range(n_comp, n) if w[j] >= ZERO_EIG_RTOL * lam_max and lam_max > 0]
    keep = keep[:i]
    vecs = np.zeros((n, i))
    vals = np.full(i, np.nan)
    if keep:
        vecs[:, : len(keep)] = _fix_signs(v[:, keep])
        vals[: len(keep)] = w[keep]
    return vecs, vals


def rwse_from_adjacency(adj, K: int) -> np.ndarray:
    """Return-probabilities ``diag(P^t)`` for ``t = 1..K`` with ``P = D^-1 A``.

    ``adj`` may be dense or sparse and need not be symmetric (directed walk).
    Nodes without out-arcs get a self-loop.
    """
    a = sp.csr_matrix(adj, dtype=float)
    n = a.shape[0]
    deg = np.asarray(a.sum(axis=1)).ravel()
    sinks = deg == 0
    if sinks.any():
        a = a + sp.csr_matrix((np.ones(sinks.sum()), (np.flatnonzero(sinks),) * 2), shape=(n, n))
        deg = np.where(sinks, 1.0, deg)
    p = sp.csr_matrix(sp.diags(1.0 / deg) @ a)
    out = np.empty((n, K))
    pt = p
    out[:, 0] = pt.diagonal()
    for t in range(1, K):
        pt = sp.csr_matrix(pt @ p)
        out[:, t] = pt.diagonal()
    return out


def hk_diag_from_adjacency(adj: np.ndarray, K: int) -> np.ndarray:
    """Heat-kernel diagonal ``sum_j phi_j(v)^2 exp(-lambda_j t)`` for ``t = 1..K``."""
    w, v = np.linalg.eigh(laplacian(adj))
    t = np.arange(1, K + 1, dtype=float)
    return (v**2) @ np.exp(-np.outer(w, t))


def _connected_pinv(lap: np.ndarray) -> np.ndarray:
    n = lap.shape[0]
    j = np.full((n, n), 1.0 / n)
    return np.linalg.inv(lap + j) - j


def elstatic_from_adjacency(adj: np.ndarray) -> np.ndarray:
    """Seven summary statistics of each node's electrostatic potential field.

    The potential of node ``v`` is column ``v`` of the Laplacian pseudoinverse
    of its connected component, shifted to vanish at ``v``. Columns: min, max,
    mean, std, mean absolute value, mean potential over the nodes at maximal
    hop distance from ``v``, and the self term ``M[v, v]``.
    """
    n = adj.shape[0]
    out = np.zeros((n, ELSTATIC_DIM))
    n_comp, labels = _components(adj)
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        if idx.size == 1:
            continue
        sub = adj[np.ix_(idx, idx)]
        m = _connected_pinv(laplacian(sub))
        hops = shortest_path(sp.csr_matrix(sub), unweighted=True, directed=False)
        diag = np.diag(m)
        for k, node in enumerate(idx):
            f = m[:, k] - m[k, k]
            far = hops[k] == hops[k].max()
            out[node] = (
                f.min(),
                f.max(),
                f.mean(),
                f.std(),
                np.abs(f).mean(),
                f[far].mean(),
                diag[k],
            )
    return out


def _require_nodes(h: HasseGraph) -> None:
    if h.n_nodes == 0:
        raise EmptyGraph(f"Hasse graph of {h.origin.label if h.origin else '?'} has no nodes")


def _wrap(h: HasseGraph, full: np.ndarray, kind: PseKind) -> EncodingMatrix:
    values = np.ascontiguousarray(full[h.target_positions])
    return EncodingMatrix(h.target_cells, values, kind, h.origin)


def lap_pe(h: HasseGraph, i: int = _DEFAULTS[LAP]) -> EncodingMatrix:
    _require_nodes(h)
    vecs, _ = lap_pe_from_adjacency(h.adjacency_matrix(), i)
    return _wrap(h, vecs, PseKind(LAP, i))


def _sparse_adjacency(h: HasseGraph, symmetric: bool) -> sp.csr_matrix:
    n = h.n_nodes
    tails, heads = h.arc_index_pairs()
    if symmetric:
        tails, heads = np.concatenate([tails, heads]), np.concatenate([heads, tails])
    a = sp.csr_matrix((np.ones(tails.size), (tails, heads)), shape=(n, n))
    a.data[:] = 1.0  # collapse duplicates from symmetrizing reciprocal arcs
    return a


def rwse(h: HasseGraph, K: int = _DEFAULTS[RWSE], directed: bool = False) -> EncodingMatrix:
    _require_nodes(h)
    full = rwse_from_adjacency(_sparse_adjacency(h, symmetric=not directed), K)
    return _wrap(h, full, PseKind(RWSE, K, directed))


def hk_diag(h: HasseGraph, K: int = _DEFAULTS[HK]) -> EncodingMatrix:
    _require_nodes(h)
    return _wrap(h, hk_diag_from_adjacency(h.adjacency_matrix(), K), PseKind(HK, K))


def elstatic_pe(h: HasseGraph) -> EncodingMatrix:
    _require_nodes(h)
    return _wrap(h, elstatic_from_adjacency(h.adjacency_matrix()), PseKind(ELSTATIC))


def encode(h: HasseGraph, kind: PseKind) -> EncodingMatrix:
    if kind.tag == LAP:
        return lap_pe(h, kind.param)
    if kind.tag == RWSE:
        return rwse(h, kind.param, kind.directed)
    if kind.tag == HK:
        return hk_diag(h, kind.param)
    return elstatic_pe(h)
