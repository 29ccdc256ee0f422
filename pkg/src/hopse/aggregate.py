"""Per-rank aggregation of channel encodings into precomputed feature bundles."""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .complex import CombinatorialComplex, cells_of_rank
from .exceptions import ChannelMismatch, EmptyGraph, FormatError, RankMismatch, ShapeError
from .lifting import InputGraph, lift
from .neighborhoods import (
    TAXONOMY,
    NeighborhoodFunction,
    hasse_graph,
    parse_neighborhoods,
    rank_targeted,
)
from .pse import EncodingMatrix, PseKind, encode, parse_pse_list

__all__ = [
    "RankFeatureBundle",
    "aggregate_rank",
    "precompute_bundle",
    "save_bundle",
    "load_bundle",
    "bundle_bytes",
    "HopseEncoder",
]

_MAGIC = b"HOPSEBND"
_VERSION = 1


@dataclass(eq=False)
class RankFeatureBundle:
    """Precomputed inputs of one complex.

    ``features[(r, tag)]`` is the ``N_r x width`` concatenation of channel
    ``tag`` over the neighborhoods targeting rank ``r``; ``init[r]`` holds the
    initial cell features and ``cell_ids[r]`` the row order.
    """

    max_rank: int
    channels: tuple[str, ...]
    features: dict[tuple[int, str], np.ndarray]
    init: dict[int, np.ndarray]
    cell_ids: dict[int, tuple[int, ...]]
    metadata: dict = field(default_factory=dict)

    @property
    def ranks(self) -> range:
        return range(self.max_rank + 1)

    def n_cells(self, r: int) -> int:
        return len(self.cell_ids[r])

    def widths(self) -> dict:
        """Column widths keyed like ``features`` plus ``("Z", r)`` for init features."""
        out = {key: m.shape[1] for key, m in self.features.items()}
        out.update({("Z", r): z.shape[1] for r, z in self.init.items()})
        return out

    def equals(self, other: RankFeatureBundle) -> bool:
        return bundle_bytes(self) == bundle_bytes(other)


def aggregate_rank(
    cc: CombinatorialComplex, encs: Sequence[EncodingMatrix], r: int, k: PseKind
) -> np.ndarray:
    """Concatenate the encodings of channel ``k`` targeting rank ``r``.

    Blocks follow the order of ``encs``. Rank-``r`` cells missing from a Hasse
    graph get a zero row in that block.
    """
    ids = cells_of_rank(cc, r)
    pos = {c: i for i, c in enumerate(ids)}
    blocks = []
    for enc in encs:
        if enc.kind != k:
            raise ChannelMismatch(f"expected channel {k.spec()}, got {enc.kind.spec()}")
        if enc.origin is not None and enc.origin.target_rank != r:
            raise RankMismatch(f"{enc.origin.label} does not target rank {r}")
        block = np.zeros((len(ids), k.width))
        if enc.rows:
            try:
                where = [pos[c] for c in enc.rows]
            except KeyError as exc:
                raise RankMismatch(f"cell {exc.args[0]} is not a rank-{r} cell") from None
            block[where] = enc.values
        blocks.append(block)
    if not blocks:
        return np.zeros((len(ids), 0))
    return np.hstack(blocks)


def _encode_or_empty(h, kind: PseKind, nf) -> EncodingMatrix:
    try:
        return encode(h, kind)
    except EmptyGraph:
        return EncodingMatrix((), np.zeros((0, kind.width)), kind, nf)


def _init_features(cc, ranks, z_init) -> dict[int, np.ndarray]:
    out = {}
    for r in ranks:
        n = cc.n_cells(r)
        if z_init is None or (isinstance(z_init, str) and z_init == "ones"):
            out[r] = np.ones((n, 1))
            continue
        if not isinstance(z_init, Mapping):
            raise ValueError(f"unknown init policy {z_init!r}")
        z = np.asarray(z_init.get(r, np.ones((n, 1))), dtype=float)
        if z.ndim != 2 or z.shape[0] != n:
            raise ShapeError(f"rank-{r} features have shape {z.shape}, expected ({n}, d)")
        if not np.all(np.isfinite(z)):
            raise ShapeError(f"rank-{r} features contain non-finite values")
        out[r] = z
    return out


def precompute_bundle(
    cc: CombinatorialComplex,
    nfs: Sequence[NeighborhoodFunction],
    kinds: Sequence[PseKind],
    z_init="ones",
    *,
    max_rank: int | None = None,
    include_self: bool = False,
    taxonomy: str | None = None,
) -> RankFeatureBundle:
    """Expand, encode, and aggregate one complex.

    ``max_rank`` fixes the ranks covered (default: the larger of the complex
    dimension and any rank the neighborhoods mention), so bundles from
    different complexes share one layout.
    """
    nfs = list(nfs)
    kinds = list(kinds)
    if not nfs:
        raise ValueError("at least one neighborhood function is required")
    if not kinds:
        raise ValueError("at least one PSE channel is required")
    tags = [k.tag for k in kinds]
    if len(set(tags)) != len(tags):
        raise ValueError("each PSE channel may appear only once")
    if max_rank is None:
        max_rank = max([cc.dim, *(max(nf.ranks()) for nf in nfs)])
    ranks = range(max_rank + 1)

    graphs = {nf: hasse_graph(cc, nf, include_self) for nf in nfs}
    features = {}
    for r in ranks:
        targeted = rank_targeted(nfs, r)
        for k in kinds:
            encs = [_encode_or_empty(graphs[nf], k, nf) for nf in targeted]
            features[(r, k.tag)] = aggregate_rank(cc, encs, r, k)
    metadata = {
        "complex_hash": cc.content_hash(),
        "neighborhoods": [nf.label for nf in nfs],
        "channels": [k.spec() for k in kinds],
        "taxonomy": taxonomy,
        "include_self": include_self,
    }
    return RankFeatureBundle(
        max_rank=max_rank,
        channels=tuple(tags),
        features=features,
        init=_init_features(cc, ranks, z_init),
        cell_ids={r: tuple(cells_of_rank(cc, r)) for r in ranks},
        metadata=metadata,
    )


def bundle_bytes(bundle: RankFeatureBundle) -> bytes:
    sections = []
    payload = []
    offset = 0

    def add(name, arr, dtype):
        nonlocal offset
        data = np.ascontiguousarray(arr, dtype=dtype).tobytes()
        sections.append({"name": name, "dtype": dtype, "shape": list(np.shape(arr)), "offset": offset})
        payload.append(data)
        offset += len(data)

    for r in bundle.ranks:
        add(f"ids/{r}", np.asarray(bundle.cell_ids[r], dtype=np.int64).reshape(-1), "<i8")
        add(f"Z/{r}", bundle.init[r], "<f8")
        for tag in bundle.channels:
            add(f"X/{r}/{tag}", bundle.features[(r, tag)], "<f8")
    header = {
        "version": _VERSION,
        "max_rank": bundle.max_rank,
        "channels": list(bundle.channels),
        "metadata": bundle.metadata,
        "sections": sections,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return _MAGIC + struct.pack("<Q", len(head)) + head + b"".join(payload)


def bundle_from_bytes(blob: bytes) -> RankFeatureBundle:
    if not blob.startswith(_MAGIC):
        raise FormatError("not a bundle file")
    (n,) = struct.unpack_from("<Q", blob, len(_MAGIC))
    start = len(_MAGIC) + 8
    try:
        header = json.loads(blob[start : start + n])
    except json.JSONDecodeError as exc:
        raise FormatError("corrupt bundle header") from exc
    if header.get("version") != _VERSION:
        raise FormatError(f"unsupported bundle version {header.get('version')}")
    base = start + n
    arrays = {}
    for sec in header["sections"]:
        dt = np.dtype(sec["dtype"])
        count = int(np.prod(sec["shape"])) if sec["shape"] else 1
        lo = base + sec["offset"]
        raw = blob[lo : lo + count * dt.itemsize]
        if len(raw) != count * dt.itemsize:
            raise FormatError(f"truncated section {sec['name']}")
        arrays[sec["name"]] = np.frombuffer(raw, dtype=dt).reshape(sec["shape"]).copy()
    max_rank = header["max_rank"]
    channels = tuple(header["channels"])
    ranks = range(max_rank + 1)
    return RankFeatureBundle(
        max_rank=max_rank,
        channels=channels,
        features={(r, t): arrays[f"X/{r}/{t}"].astype(float) for r in ranks for t in channels},
        init={r: arrays[f"Z/{r}"].astype(float) for r in ranks},
        cell_ids={r: tuple(int(i) for i in arrays[f"ids/{r}"]) for r in ranks},
        metadata=header["metadata"],
    )


def save_bundle(bundle: RankFeatureBundle, path) -> bytes:
    blob = bundle_bytes(bundle)
    Path(path).write_bytes(blob)
    return blob


def load_bundle(path) -> RankFeatureBundle:
    return bundle_from_bytes(Path(path).read_bytes())


class HopseEncoder(TransformerMixin, BaseEstimator):
    """Turn graphs (or ready-made complexes) into :class:`RankFeatureBundle` objects.

    Stateless apart from parameter validation, so ``fit`` only resolves the
    neighborhood set and channel list. Plugs into ``sklearn.pipeline.Pipeline``
    in front of :class:`hopse.model.HopseClassifier`.

    Parameters
    ----------
    lifting : {"clique", "cycle"}
        How input graphs become complexes. Complex inputs bypass lifting.
    max_rank : int
        Highest simplex rank for the clique lift.
    max_cycle_len : int
        Longest chordless cycle turned into a 2-cell by the cycle lift.
    neighborhoods : str or list
        Taxonomy name (``"Inc-1"``), ``;``-separated spec, or explicit list.
    pse : str or list
        Channel spec such as ``"rwse:K=16,lap:i=4"`` or a list of PseKind.
    include_self : bool
        Keep each cell in its own adjacency neighborhood.
    """

    def __init__(
        self,
        lifting="clique",
        max_rank=2,
        max_cycle_len=6,
        neighborhoods="Inc-1",
        pse="rwse:K=16",
        include_self=False,
    ):
        self.lifting = lifting
        self.max_rank = max_rank
        self.max_cycle_len = max_cycle_len
        self.neighborhoods = neighborhoods
        self.pse = pse
        self.include_self = include_self

    def fit(self, X=None, y=None):
        if self.lifting not in ("clique", "cycle"):
            raise ValueError(f"lifting must be 'clique' or 'cycle', got {self.lifting!r}")
        if isinstance(self.neighborhoods, str):
            self.neighborhoods_ = parse_neighborhoods(self.neighborhoods)
            self.taxonomy_ = self.neighborhoods if self.neighborhoods in TAXONOMY else None
        else:
            self.neighborhoods_ = list(self.neighborhoods)
            self.taxonomy_ = None
        self.kinds_ = parse_pse_list(self.pse) if isinstance(self.pse, str) else list(self.pse)
        lift_rank = self.max_rank if self.lifting == "clique" else 2
        self.max_rank_ = max([lift_rank, *(max(nf.ranks()) for nf in self.neighborhoods_)])
        return self

    def to_complex(self, item) -> CombinatorialComplex:
        if isinstance(item, CombinatorialComplex):
            return item
        if isinstance(item, InputGraph):
            return lift(item, self.lifting, self.max_rank, self.max_cycle_len)
        raise TypeError(f"expected InputGraph or CombinatorialComplex, got {type(item).__name__}")

    def transform_one(self, item) -> RankFeatureBundle:
        check_is_fitted(self, "kinds_")
        return precompute_bundle(
            self.to_complex(item),
            self.neighborhoods_,
            self.kinds_,
            max_rank=self.max_rank_,
            include_self=self.include_self,
            taxonomy=self.taxonomy_,
        )

    def transform(self, X) -> list[RankFeatureBundle]:
        return [self.transform_one(item) for item in X]
