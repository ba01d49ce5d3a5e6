"""Text-attributed graphs and the subgraph operations built on them.

A :class:`TextGraph` is a directed multigraph whose nodes and edges all carry
free-form text. Parallel edges and self-loops are allowed (knowledge graphs
routinely hold several relations between one pair of entities); an edge's
identity is its position in the edge list. Reachability — and therefore
K-hop neighborhoods and ego-graphs — ignores edge direction, while rendered
descriptions preserve it.

Graphs load from either a JSON document::

    {"nodes": [{"id": 0, "text": "..."}, ...],
     "edges": [{"src": 0, "dst": 1, "text": "..."}, ...]}

or the two-file CSV convention used by GraphQA-style datasets
(nodes: ``node_id,node_attr``; edges: ``src,edge_attr,dst``).

Instances are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import csv
import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DocumentError, NotFoundError, ReferentialError
from .serialize import dumps_canonical

NODES_CSV_HEADER = ["node_id", "node_attr"]
EDGES_CSV_HEADER = ["src", "edge_attr", "dst"]


@dataclass(frozen=True)
class EdgeRecord:
    """One directed edge; ``edge_id`` is its index in the owning graph."""

    src: int
    dst: int
    text: str
    edge_id: int


class TextGraph:
    """Directed multigraph with text attributes on every node and edge."""

    def __init__(self, nodes: dict[int, str], edges: Iterable[tuple[int, int, str]]):
        node_map: dict[int, str] = {}
        for nid, text in nodes.items():
            if not isinstance(nid, int) or isinstance(nid, bool) or nid < 0:
                raise DocumentError(f"node id {nid!r} is not a non-negative integer")
            if not isinstance(text, str):
                raise DocumentError(f"node {nid} text is not a string")
            if nid in node_map:
                raise DocumentError(f"duplicate node id {nid}")
            node_map[nid] = text

        records: list[EdgeRecord] = []
        for eid, (src, dst, text) in enumerate(edges):
            if src not in node_map or dst not in node_map:
                missing = src if src not in node_map else dst
                raise ReferentialError(
                    f"edge {eid} ({src} -> {dst}) references unknown node {missing}"
                )
            if not isinstance(text, str):
                raise DocumentError(f"edge {eid} text is not a string")
            records.append(EdgeRecord(src, dst, text, eid))

        self._nodes = node_map
        self._edges = tuple(records)

        # Undirected incidence, sorted by (neighbor id, edge id); this order
        # is load-bearing for deterministic BFS and message passing.
        adj: dict[int, list[tuple[int, int]]] = {nid: [] for nid in node_map}
        for rec in records:
            adj[rec.src].append((rec.dst, rec.edge_id))
            if rec.dst != rec.src:
                adj[rec.dst].append((rec.src, rec.edge_id))
        self._adjacency = {nid: tuple(sorted(pairs)) for nid, pairs in adj.items()}
        self._fingerprint: str | None = None

    @property
    def nodes(self) -> dict[int, str]:
        return dict(self._nodes)

    @property
    def edges(self) -> tuple[EdgeRecord, ...]:
        return self._edges

    def node_text(self, node_id: int) -> str:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise NotFoundError(f"node {node_id} not in graph") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def adjacency(self, node_id: int) -> tuple[tuple[int, int], ...]:
        """Undirected (neighbor, edge_id) pairs, ascending; self-loops once."""
        try:
            return self._adjacency[node_id]
        except KeyError:
            raise NotFoundError(f"node {node_id} not in graph") from None

    def node_count(self) -> int:
        return len(self._nodes)

    def edge_count(self) -> int:
        return len(self._edges)

    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._nodes))

    def to_document(self) -> dict:
        """Canonical JSON-document form (nodes ascending, edges in order)."""
        return {
            "nodes": [{"id": nid, "text": self._nodes[nid]} for nid in sorted(self._nodes)],
            "edges": [{"src": e.src, "dst": e.dst, "text": e.text} for e in self._edges],
        }

    def fingerprint(self) -> str:
        """SHA-256 of the canonical document; stable across load formats."""
        if self._fingerprint is None:
            blob = dumps_canonical(self.to_document()).encode("utf-8")
            self._fingerprint = hashlib.sha256(blob).hexdigest()
        return self._fingerprint

    def __repr__(self) -> str:
        return f"TextGraph(|V|={len(self._nodes)}, |E|={len(self._edges)})"


@dataclass(frozen=True)
class Subgraph:
    """A consistent (node set, edge set) selection of a parent graph.

    When ``center`` and ``hops`` are set the subgraph is the induced
    subgraph on the K-hop neighborhood of the center.
    """

    graph: TextGraph = field(repr=False)
    node_ids: frozenset[int]
    edge_ids: frozenset[int]
    center: int | None = None
    hops: int | None = None

    def __post_init__(self):
        for eid in self.edge_ids:
            edge = self.graph.edges[eid]
            if edge.src not in self.node_ids or edge.dst not in self.node_ids:
                raise ReferentialError(
                    f"edge {eid} endpoint outside subgraph node set"
                )

    def sorted_nodes(self) -> list[int]:
        return sorted(self.node_ids)

    def sorted_edges(self) -> list[int]:
        return sorted(self.edge_ids)


def load_graph_json(source: str | Path | dict) -> TextGraph:
    """Load a graph from a JSON document (path, JSON text is not accepted)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with path.open("r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(
                f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        except OSError as exc:
            raise DocumentError(f"cannot read graph document {path}: {exc}") from exc
    else:
        doc = source

    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise DocumentError("graph document must be an object with 'nodes' and 'edges'")

    nodes: dict[int, str] = {}
    for i, item in enumerate(doc["nodes"]):
        if not isinstance(item, dict) or "id" not in item or "text" not in item:
            raise DocumentError(f"nodes[{i}]: expected object with 'id' and 'text'")
        nid = item["id"]
        if not isinstance(nid, int) or isinstance(nid, bool) or nid < 0:
            raise DocumentError(f"nodes[{i}].id: {nid!r} is not a non-negative integer")
        if nid in nodes:
            raise DocumentError(f"nodes[{i}]: duplicate node id {nid}")
        if not isinstance(item["text"], str):
            raise DocumentError(f"nodes[{i}].text: not a string")
        nodes[nid] = item["text"]

    edges: list[tuple[int, int, str]] = []
    for i, item in enumerate(doc["edges"]):
        if not isinstance(item, dict) or not {"src", "dst", "text"} <= set(item):
            raise DocumentError(f"edges[{i}]: expected object with 'src', 'dst' and 'text'")
        src, dst, text = item["src"], item["dst"], item["text"]
        if not isinstance(src, int) or not isinstance(dst, int):
            raise DocumentError(f"edges[{i}]: endpoints must be integers")
        if not isinstance(text, str):
            raise DocumentError(f"edges[{i}].text: not a string")
        edges.append((src, dst, text))

    return TextGraph(nodes, edges)


def _read_csv_rows(path: Path, header: list[str]) -> list[list[str]]:
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != header:
        raise DocumentError(f"{path}: expected header {','.join(header)!r}")
    return rows[1:]


def load_graph_csv(nodes_path: str | Path, edges_path: str | Path) -> TextGraph:
    """Load a graph from the GraphQA two-file CSV convention."""
    nodes_path, edges_path = Path(nodes_path), Path(edges_path)

    nodes: dict[int, str] = {}
    for lineno, row in enumerate(_read_csv_rows(nodes_path, NODES_CSV_HEADER), start=2):
        if len(row) != 2:
            raise DocumentError(f"{nodes_path} line {lineno}: expected 2 fields, got {len(row)}")
        try:
            nid = int(row[0])
        except ValueError:
            raise DocumentError(
                f"{nodes_path} line {lineno}: node_id {row[0]!r} is not an integer"
            ) from None
        if nid in nodes:
            raise DocumentError(f"{nodes_path} line {lineno}: duplicate node id {nid}")
        nodes[nid] = row[1]

    edges: list[tuple[int, int, str]] = []
    for lineno, row in enumerate(_read_csv_rows(edges_path, EDGES_CSV_HEADER), start=2):
        if len(row) != 3:
            raise DocumentError(f"{edges_path} line {lineno}: expected 3 fields, got {len(row)}")
        try:
            src, dst = int(row[0]), int(row[2])
        except ValueError:
            raise DocumentError(
                f"{edges_path} line {lineno}: endpoints must be integers"
            ) from None
        edges.append((src, dst, row[1]))

    return TextGraph(nodes, edges)


def load_graph(source: str | Path | dict) -> TextGraph:
    """Load a graph document: JSON dict, ``*.json`` path, or a directory
    containing ``nodes.csv`` and ``edges.csv``."""
    if isinstance(source, dict):
        return load_graph_json(source)
    path = Path(source)
    if path.is_dir():
        nodes_csv, edges_csv = path / "nodes.csv", path / "edges.csv"
        if nodes_csv.exists() and edges_csv.exists():
            return load_graph_csv(nodes_csv, edges_csv)
        raise DocumentError(f"{path}: directory has no nodes.csv/edges.csv pair")
    if path.suffix.lower() == ".csv":
        raise DocumentError(
            f"{path}: CSV graphs load as a pair; use load_graph_csv(nodes, edges)"
        )
    return load_graph_json(path)


def k_hop_neighborhood(g: TextGraph, center: int, k: int) -> set[int]:
    """All nodes within undirected shortest-path distance ``k`` of ``center``.

    Includes the center itself. Direction is ignored for reachability.
    """
    if not g.has_node(center):
        raise NotFoundError(f"node {center} not in graph")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    seen = {center}
    frontier = deque([(center, 0)])
    while frontier:
        node, dist = frontier.popleft()
        if dist == k:
            continue
        for nbr, _eid in g.adjacency(node):
            if nbr not in seen:
                seen.add(nbr)
                frontier.append((nbr, dist + 1))
    return seen


def ego_graph(g: TextGraph, center: int, k: int) -> Subgraph:
    """Induced subgraph on the K-hop neighborhood of ``center``."""
    nodes = k_hop_neighborhood(g, center, k)
    edge_ids = {
        eid
        for nid in nodes
        for nbr, eid in g.adjacency(nid)
        if nbr in nodes
    }
    return Subgraph(
        graph=g,
        node_ids=frozenset(nodes),
        edge_ids=frozenset(edge_ids),
        center=center,
        hops=k,
    )


def union_subgraphs(parts: list[Subgraph]) -> Subgraph:
    """Set-semantics union of subgraphs sharing one parent graph."""
    if not parts:
        raise ValueError("union_subgraphs needs at least one subgraph")
    parent = parts[0].graph
    for part in parts[1:]:
        if part.graph is not parent:
            raise ValueError("union_subgraphs: subgraphs have different parent graphs")
    nodes = frozenset().union(*(p.node_ids for p in parts))
    edges = frozenset().union(*(p.edge_ids for p in parts))
    return Subgraph(graph=parent, node_ids=nodes, edge_ids=edges)


def iter_dataset_graphs(dataset_dir: str | Path) -> Iterator[tuple[str, TextGraph]]:
    """Yield (name, graph) pairs from a dataset directory.

    Supports the GraphQA layout (``nodes/<i>.csv`` + ``edges/<i>.csv``) and
    directories of ``*.json`` graph documents.
    """
    root = Path(dataset_dir)
    if not root.is_dir():
        raise DocumentError(f"{root}: not a directory")

    nodes_dir, edges_dir = root / "nodes", root / "edges"
    if nodes_dir.is_dir() and edges_dir.is_dir():
        stems = sorted(
            (p.stem for p in nodes_dir.glob("*.csv")),
            key=lambda s: (len(s), s),
        )
        if not stems:
            raise DocumentError(f"{nodes_dir}: no *.csv files")
        for stem in stems:
            edges_csv = edges_dir / f"{stem}.csv"
            if not edges_csv.exists():
                raise DocumentError(f"{edges_csv}: missing edges file for graph {stem!r}")
            yield stem, load_graph_csv(nodes_dir / f"{stem}.csv", edges_csv)
        return

    json_files = sorted(root.glob("*.json"))
    if not json_files:
        raise DocumentError(f"{root}: no GraphQA csv layout and no *.json documents")
    for path in json_files:
        yield path.stem, load_graph_json(path)


def dataset_stats(dataset_dir: str | Path) -> dict:
    """Graph count and per-graph mean node/edge counts for a dataset."""
    total_nodes = 0
    total_edges = 0
    count = 0
    for _name, g in iter_dataset_graphs(dataset_dir):
        total_nodes += g.node_count()
        total_edges += g.edge_count()
        count += 1
    return {
        "graphs": count,
        "mean_nodes": total_nodes / count,
        "mean_edges": total_edges / count,
    }
