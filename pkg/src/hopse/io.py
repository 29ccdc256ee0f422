"""Encoding files and Hasse-graph exports."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complex import CombinatorialComplex
from .exceptions import FormatError
from .neighborhoods import HasseGraph, parse_neighborhood
from .pse import EncodingMatrix, parse_pse

__all__ = [
    "EncodingFile",
    "write_encoding",
    "read_encoding",
    "write_hasse_graph",
    "read_hasse_graph",
]

_ENC_MAGIC = b"HOPSEENC"


@dataclass(eq=False)
class EncodingFile:
    complex_hash: str
    encoding: EncodingMatrix


def _header(enc: EncodingMatrix, complex_hash: str) -> dict:
    n, d = enc.values.shape
    return {
        "complex_hash": complex_hash,
        "neighborhood": enc.origin.label if enc.origin is not None else None,
        "kind": enc.kind.tag,
        "params": enc.kind.spec(),
        "rows": n,
        "cols": d,
    }


def encoding_text(enc: EncodingMatrix, complex_hash: str) -> str:
    head = _header(enc, complex_hash)
    lines = ["# hopse-encoding v1"]
    lines += [f"# {k}: {head[k]}" for k in ("complex_hash", "neighborhood", "kind", "params", "rows", "cols")]
    for cid, row in zip(enc.rows, enc.values):
        lines.append("\t".join([str(cid)] + [repr(float(x)) for x in row]))
    return "\n".join(lines) + "\n"


def encoding_binary(enc: EncodingMatrix, complex_hash: str) -> bytes:
    head = json.dumps(_header(enc, complex_hash), sort_keys=True, separators=(",", ":")).encode()
    ids = np.asarray(enc.rows, dtype="<i8").tobytes()
    vals = np.ascontiguousarray(enc.values, dtype="<f8").tobytes()
    return _ENC_MAGIC + struct.pack("<Q", len(head)) + head + ids + vals


def write_encoding(enc: EncodingMatrix, complex_hash: str, path, fmt: str = "text") -> None:
    path = Path(path)
    if fmt == "text":
        path.write_text(encoding_text(enc, complex_hash))
    elif fmt == "binary":
        path.write_bytes(encoding_binary(enc, complex_hash))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _from_header(head: dict, rows, values) -> EncodingFile:
    nf = parse_neighborhood(head["neighborhood"]) if head.get("neighborhood") not in (None, "None") else None
    kind = parse_pse(head["params"])
    return EncodingFile(head["complex_hash"], EncodingMatrix(tuple(rows), values, kind, nf))


def read_encoding(path) -> EncodingFile:
    path = Path(path)
    blob = path.read_bytes()
    if blob.startswith(_ENC_MAGIC):
        (n,) = struct.unpack_from("<Q", blob, len(_ENC_MAGIC))
        start = len(_ENC_MAGIC) + 8
        head = json.loads(blob[start : start + n])
        rows, cols = head["rows"], head["cols"]
        body = blob[start + n :]
        if len(body) != rows * 8 + rows * cols * 8:
            raise FormatError("truncated encoding file")
        ids = np.frombuffer(body[: rows * 8], dtype="<i8")
        vals = np.frombuffer(body[rows * 8 :], dtype="<f8").reshape(rows, cols).copy()
        return _from_header(head, [int(i) for i in ids], vals)
    head, rows, vals = {}, [], []
    for line in blob.decode().splitlines():
        if line.startswith("#"):
            if ":" in line:
                key, _, value = line[1:].partition(":")
                head[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        parts = line.split("\t")
        rows.append(int(parts[0]))
        vals.append([float(x) for x in parts[1:]])
    try:
        n, d = int(head["rows"]), int(head["cols"])
    except KeyError as exc:
        raise FormatError(f"missing header field {exc.args[0]}") from None
    values = np.array(vals, dtype=float).reshape(n, d)
    return _from_header(head, rows, values)


def write_hasse_graph(h: HasseGraph, cc: CombinatorialComplex, stem) -> tuple[Path, Path]:
    """Write ``<stem>.edges`` (edge-list format over node indices) and ``<stem>.map``."""
    stem = Path(stem)
    idx = h.index
    edges_path = stem.with_suffix(".edges")
    map_path = stem.with_suffix(".map")
    lines = [f"{h.n_nodes} {len(h.arcs)}"]
    lines += [f"{idx[a]} {idx[b]}" for a, b in h.arcs]
    edges_path.write_text("\n".join(lines) + "\n")
    targets = set(h.target_cells)
    rows = ["# node_id\tcell_id\trank\ttarget"]
    rows += [f"{i}\t{c}\t{cc.rank(c)}\t{int(c in targets)}" for i, c in enumerate(h.nodes)]
    map_path.write_text("\n".join(rows) + "\n")
    return edges_path, map_path


def read_hasse_graph(stem, origin) -> HasseGraph:
    stem = Path(stem)
    node_cells, targets = [], []
    for line in stem.with_suffix(".map").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        _, cell, _, is_target = line.split("\t")
        node_cells.append(int(cell))
        if is_target == "1":
            targets.append(int(cell))
    lines = [ln for ln in stem.with_suffix(".edges").read_text().splitlines() if ln.strip()]
    arcs = []
    for ln in lines[1:]:
        a, b = (int(t) for t in ln.split())
        arcs.append((node_cells[a], node_cells[b]))
    return HasseGraph(tuple(node_cells), tuple(sorted(arcs)), tuple(targets), origin)
