"""Batch driver (lift -> expand -> encode -> aggregate), synthetic data, and scaling benchmark."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .aggregate import HopseEncoder, RankFeatureBundle, save_bundle
from .exceptions import HopseError, UnknownSet
from .lifting import InputGraph, clique_lift, read_edge_list
from .model import HopseClassifier, HopseModel

__all__ = [
    "ConfigError",
    "PipelineConfig",
    "PipelineResult",
    "run_pipeline",
    "worker_count",
    "fused_triangle_ring",
    "make_synth_2cell",
    "BenchReport",
    "bench_scaling",
    "train_demo",
]

log = logging.getLogger(__name__)


class ConfigError(HopseError, ValueError):
    pass


def worker_count() -> int:
    raw = os.environ.get("HOPSE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"HOPSE_THREADS must be an integer, got {raw!r}") from None


@dataclass
class PipelineConfig:
    lifting: str = "clique"
    max_rank: int = 2
    max_cycle_len: int = 6
    neighborhoods: str = "Inc-1"
    pse: str = "rwse:K=16"
    include_self: bool = False
    out_dir: str = "hopse_out"
    seed: int = 0

    def encoder(self) -> HopseEncoder:
        enc = HopseEncoder(
            lifting=self.lifting,
            max_rank=self.max_rank,
            max_cycle_len=self.max_cycle_len,
            neighborhoods=self.neighborhoods,
            pse=self.pse,
            include_self=self.include_self,
        )
        try:
            return enc.fit()
        except (UnknownSet, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class PipelineResult:
    bundles: list[RankFeatureBundle | None]
    manifest: dict

    @property
    def n_failed(self) -> int:
        return sum(1 for b in self.bundles if b is None)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_pipeline(cfg: PipelineConfig, graphs, names=None) -> PipelineResult:
    """Process each graph (an :class:`InputGraph` or an edge-list path) independently.

    Failures are recorded per graph in ``manifest.json``; they never abort
    the other jobs.
    """
    encoder = cfg.encoder()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs = list(graphs)
    if names is None:
        names = [Path(g).stem if not isinstance(g, InputGraph) else f"graph_{i:04d}" for i, g in enumerate(graphs)]

    def job(item, name):
        start = time.perf_counter()
        entry = {"name": name, "status": "ok", "error": None, "bundle": None, "sha256": None}
        bundle = None
        try:
            g = item if isinstance(item, InputGraph) else read_edge_list(item)
            bundle = encoder.transform_one(g)
            path = out_dir / f"{name}.hb"
            save_bundle(bundle, path)
            entry["bundle"] = path.name
            entry["sha256"] = _sha256(path)
            entry["complex_hash"] = bundle.metadata["complex_hash"]
        except (HopseError, ValueError, OSError) as exc:
            entry["status"] = "failed"
            entry["error"] = f"{type(exc).__name__}: {exc}"
            log.warning("graph %s failed: %s", name, exc)
        entry["seconds"] = time.perf_counter() - start
        return bundle, entry

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(job, graphs, names))
    manifest = {
        "config": asdict(cfg),
        "graphs": [entry for _, entry in results],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return PipelineResult([b for b, _ in results], manifest)


def verify_manifest(out_dir) -> list[str]:
    """Names of bundles whose file hash no longer matches the manifest."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    bad = []
    for entry in manifest["graphs"]:
        if entry["status"] != "ok":
            continue
        path = out_dir / entry["bundle"]
        if not path.exists() or _sha256(path) != entry["sha256"]:
            bad.append(entry["name"])
    return bad


def fused_triangle_ring(k: int) -> InputGraph:
    """``k`` triangles glued around a ring: ring vertex ``i`` and ``i+1`` share apex ``k+i``.

    Cell count of the clique lift is ``6k`` (plus one for ``k == 3``, where the
    ring itself is a triangle); maximum degree is 4.
    """
    if k < 3:
        raise ValueError("need at least 3 triangles")
    edges = []
    for i in range(k):
        j = (i + 1) % k
        apex = k + i
        edges += [(i, j), (i, apex), (j, apex)]
    return InputGraph.from_edges(2 * k, edges)


def _random_tree_edges(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    return [(int(rng.integers(0, v)), v) for v in range(1, n)]


def _tree_distances(n: int, edges) -> np.ndarray:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = np.full((n, n), -1, dtype=int)
    for s in range(n):
        dist[s, s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if dist[s, w] < 0:
                    dist[s, w] = dist[s, u] + 1
                    stack.append(w)
    return dist


def make_synth_2cell(
    n_samples: int = 128, seed: int = 0, min_vertices: int = 6, max_vertices: int = 12, max_cycle_len: int = 6
) -> tuple[list[InputGraph], np.ndarray]:
    """Balanced binary task: random trees (label 0) vs. unicyclic graphs (label 1).

    The single cycle of a positive graph has length 3..``max_cycle_len`` and
    is chordless, so its cycle lift has exactly one 2-cell.
    """
    rng = np.random.default_rng(seed)
    graphs, labels = [], []
    for i in range(n_samples):
        n = int(rng.integers(min_vertices, max_vertices + 1))
        edges = _random_tree_edges(rng, n)
        label = i % 2
        if label:
            dist = _tree_distances(n, edges)
            pairs = np.argwhere((dist >= 2) & (dist <= max_cycle_len - 1))
            pairs = pairs[pairs[:, 0] < pairs[:, 1]]
            if len(pairs) == 0:
                # star-like tree; any two leaves of the centre are at distance 2
                pairs = np.argwhere(dist == 2)
            u, v = pairs[int(rng.integers(0, len(pairs)))]
            edges.append((int(u), int(v)))
        graphs.append(InputGraph.from_edges(n, edges))
        labels.append(label)
    return graphs, np.array(labels)


def train_demo(
    n_samples: int = 128,
    epochs: int = 200,
    seed: int = 7,
    lr: float = 1e-2,
    hidden: int = 16,
    n_layers: int = 2,
):
    """Fit the synthetic 2-cell task; returns ``(classifier, bundles, labels)``."""
    graphs, labels = make_synth_2cell(n_samples, seed)
    encoder = HopseEncoder(lifting="cycle", neighborhoods="Inc-1", pse="rwse:K=8").fit()
    bundles = encoder.transform(graphs)
    clf = HopseClassifier(hidden=hidden, n_layers=n_layers, epochs=epochs, lr=lr, seed=seed)
    clf.fit(bundles, labels)
    return clf, bundles, labels


@dataclass
class BenchReport:
    sizes: list[int]
    cells: list[int]
    medians: list[float]
    slope: float | None
    repetitions: int
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def bench_scaling(
    sizes,
    repetitions: int = 5,
    neighborhoods: str = "Mix-1",
    pse: str = "rwse:K=8",
    hidden: int = 16,
    n_layers: int = 2,
    seed: int = 0,
) -> BenchReport:
    """Median wall time of preprocessing plus one forward pass per requested cell count.

    Each size is mapped to the fused-triangle ring with ``max(3, round(size / 6))``
    triangles; the log-log slope is fit against the actual cell counts.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    repetitions = max(5, int(repetitions))
    encoder = HopseEncoder(neighborhoods=neighborhoods, pse=pse).fit()
    model = None
    cells, medians = [], []
    for size in sizes:
        cc = clique_lift(fused_triangle_ring(max(3, round(size / 6))))
        if model is None:
            model = HopseModel.from_bundle(encoder.transform_one(cc), hidden=hidden, n_layers=n_layers, seed=seed)
        times = []
        for _ in range(repetitions):
            start = time.perf_counter()
            bundle = encoder.transform_one(cc)
            model.predict_raw([bundle])
            times.append(time.perf_counter() - start)
        cells.append(len(cc))
        medians.append(float(np.median(times)))
    notes = []
    slope = None
    if len(set(cells)) >= 2:
        slope = float(np.polyfit(np.log(cells), np.log(medians), 1)[0])
    else:
        notes.append("slope undefined: fewer than two distinct sizes")
    return BenchReport(sizes, cells, medians, slope, repetitions, notes)
