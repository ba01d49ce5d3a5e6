"""Ego-graph index: one pooled embedding per K-hop ego-graph.

The candidate pool is exactly the |V| ego-graphs of the source graph, so
query-time ranking is an exact full scan — no approximate nearest-neighbor
structure. The on-disk format is line-oriented JSON (UTF-8, LF):

    {"magic":"GRAGIDX","version":1,"dim":d,"k":K,"fingerprint":hex,"entries":n}
    {"center":id,"nodes":c,"edges":c,"z":[...]}        # n lines, center asc

Floats carry 17 significant digits, so a load reproduces the built index
bit for bit.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .embedding import pool_mean
from .errors import (
    DimensionError,
    FingerprintError,
    GragError,
    IndexFormatError,
    IndexVersionError,
)
from .graph import TextGraph, ego_graph
from .serialize import dumps_canonical

MAGIC = "GRAGIDX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EgoIndexEntry:
    center: int
    k: int
    z_g: np.ndarray
    node_count: int
    edge_count: int


@dataclass(frozen=True)
class EgoIndex:
    dim: int
    k: int
    fingerprint: str
    entries: tuple[EgoIndexEntry, ...]  # ascending by center, one per node

    def entry_for(self, center: int) -> EgoIndexEntry:
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid].center < center:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.entries) and self.entries[lo].center == center:
            return self.entries[lo]
        raise KeyError(center)


@dataclass(frozen=True)
class RankedSubgraph:
    entry: EgoIndexEntry
    score: float
    rank: int  # 1-based


def ego_texts(g: TextGraph, center: int, k: int) -> tuple[list[str], int, int]:
    """Texts of an ego-graph (node texts ascending id, then edge texts
    ascending edge id) plus its node/edge counts."""
    sub = ego_graph(g, center, k)
    texts = [g.node_text(n) for n in sub.sorted_nodes()]
    texts.extend(g.edges[e].text for e in sub.sorted_edges())
    return texts, len(sub.node_ids), len(sub.edge_ids)


def build_index(g: TextGraph, k: int, embedder, workers: int = 1) -> EgoIndex:
    """Embed and pool every node's K-hop ego-graph.

    The result is identical across runs and worker counts: embeddings are
    deterministic, pooling is order-canonical, and entries merge sorted by
    center id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    centers = g.node_ids()

    def one(center: int) -> EgoIndexEntry:
        try:
            texts, n_nodes, n_edges = ego_texts(g, center, k)
            vectors = embedder.embed_texts(texts)
            z_g = pool_mean(vectors)
        except GragError as exc:
            raise type(exc)(f"center {center}: {exc}") from exc
        return EgoIndexEntry(center, k, z_g, n_nodes, n_edges)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(one, centers))
    else:
        entries = [one(c) for c in centers]

    entries.sort(key=lambda e: e.center)
    return EgoIndex(
        dim=embedder.dim,
        k=k,
        fingerprint=g.fingerprint(),
        entries=tuple(entries),
    )


def persist_index(idx: EgoIndex, sink: str | Path | IO[str]) -> None:
    """Write the index in the versioned line-JSON format."""
    header = {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "dim": idx.dim,
        "k": idx.k,
        "fingerprint": idx.fingerprint,
        "entries": len(idx.entries),
    }

    def write(fh: IO[str]) -> None:
        fh.write(dumps_canonical(header) + "\n")
        for entry in idx.entries:
            line = {
                "center": entry.center,
                "nodes": entry.node_count,
                "edges": entry.edge_count,
                "z": entry.z_g,
            }
            fh.write(dumps_canonical(line) + "\n")

    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            write(fh)
    else:
        write(sink)


def load_index(source: str | Path | IO[str], graph: TextGraph | None = None) -> EgoIndex:
    """Load an index file; verifies the fingerprint when a graph is given."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    else:
        lines = source.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise IndexFormatError("index file is empty")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IndexFormatError(f"index header is not JSON: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise IndexVersionError("bad index magic; not a GRAGIDX file")
    if header.get("version") != FORMAT_VERSION:
        raise IndexVersionError(
            f"unsupported index version {header.get('version')!r}"
        )
    try:
        dim = int(header["dim"])
        k = int(header["k"])
        fingerprint = str(header["fingerprint"])
        expected = int(header["entries"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexFormatError(f"index header missing field: {exc}") from exc

    body = lines[1:]
    if len(body) < expected:
        raise IndexFormatError(
            f"index truncated: header promises {expected} entries, file has {len(body)}"
        )
    if len(body) > expected:
        raise IndexFormatError(
            f"index has trailing data: {len(body)} entry lines, header says {expected}"
        )

    entries: list[EgoIndexEntry] = []
    prev_center = -1
    for lineno, line in enumerate(body, start=2):
        try:
            rec = json.loads(line)
            center = int(rec["center"])
            z = np.asarray(rec["z"], dtype=np.float64)
            entry = EgoIndexEntry(center, k, z, int(rec["nodes"]), int(rec["edges"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise IndexFormatError(f"index line {lineno}: {exc}") from exc
        if z.ndim != 1 or z.shape[0] != dim:
            raise IndexFormatError(
                f"index line {lineno}: vector dim {z.shape} != header dim {dim}"
            )
        if center <= prev_center:
            raise IndexFormatError(
                f"index line {lineno}: centers not strictly ascending"
            )
        prev_center = center
        entries.append(entry)

    if graph is not None and graph.fingerprint() != fingerprint:
        raise FingerprintError(
            "index was built for a different graph "
            f"(index {fingerprint[:12]}…, graph {graph.fingerprint()[:12]}…)"
        )

    return EgoIndex(dim=dim, k=k, fingerprint=fingerprint, entries=tuple(entries))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero-norm inputs score 0 rather than erroring."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"cosine: shapes {a.shape} and {b.shape} differ")
    na = np.sqrt(np.dot(a, a))
    nb = np.sqrt(np.dot(b, b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def rank_top_n(idx: EgoIndex, z_q: np.ndarray, n: int) -> list[RankedSubgraph]:
    """Exact top-N entries by cosine to the query; ties break on center id."""
    z_q = np.asarray(z_q, dtype=np.float64)
    if z_q.ndim != 1 or z_q.shape[0] != idx.dim:
        raise DimensionError(
            f"query dim {z_q.shape} does not match index dim {idx.dim}"
        )
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scored = [(cosine(entry.z_g, z_q), entry) for entry in idx.entries]
    scored.sort(key=lambda pair: (-pair[0], pair[1].center))
    return [
        RankedSubgraph(entry=entry, score=score, rank=i + 1)
        for i, (score, entry) in enumerate(scored[:n])
    ]
