"""Query-conditioned soft pruning.

Each node and edge of the merged retrieval result gets a scaling factor in
(0, 1): the element-wise distance between its text embedding and the query
embedding is fed through a small sigmoid-headed feed-forward network. The
scales mask contributions inside the graph encoder; they never delete
anything from the text view (an optional hard-drop threshold exists at the
description layer only).

A scale depends only on (text, query), so a node shared by several
retrieved ego-graphs always gets one consistent value, and the result is
invariant to merge order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, GragError, WeightFormatError
from .graph import Subgraph, TextGraph, ego_graph, union_subgraphs
from .index import RankedSubgraph
from .weights import MlpWeights, mlp_forward

# Largest open-interval doubles: sigmoid saturates in float64 for |x| ~ 37,
# and the contract promises alpha strictly inside (0, 1).
_ALPHA_MIN = np.nextafter(0.0, 1.0)
_ALPHA_MAX = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class RelevanceScales:
    node_alpha: dict[int, float]
    edge_alpha: dict[int, float]


@dataclass(frozen=True)
class PrunedSubgraph:
    """Union of the retrieved ego-graphs plus its relevance scales."""

    sub: Subgraph = field(repr=False)
    scales: RelevanceScales
    query_ref: str  # sha256 of the query text


def elementwise_distance(z: np.ndarray, z_q: np.ndarray) -> np.ndarray:
    """Componentwise absolute difference |z_i - z_q,i|."""
    z = np.asarray(z, dtype=np.float64)
    z_q = np.asarray(z_q, dtype=np.float64)
    if z.shape != z_q.shape or z.ndim != 1:
        raise DimensionError(f"elementwise_distance: shapes {z.shape} and {z_q.shape} differ")
    return np.abs(z - z_q)


def _check_scale_head(name: str, head: MlpWeights, dim: int) -> None:
    if head.input_dim != dim:
        raise DimensionError(
            f"{name}: input dim {head.input_dim} does not match embedding dim {dim}"
        )
    if not head.layers or head.layers[-1].activation != "sigmoid":
        raise WeightFormatError(f"{name}: scale head must end in a sigmoid layer")
    if head.output_dim != 1:
        raise WeightFormatError(f"{name}: scale head must emit a single scalar")


def _scale(head: MlpWeights, z: np.ndarray, z_q: np.ndarray) -> float:
    alpha = mlp_forward(head, elementwise_distance(z, z_q))[0]
    # Keep the documented open interval even under saturating weights.
    return float(np.clip(alpha, _ALPHA_MIN, _ALPHA_MAX))


def relevance_scales(
    g: TextGraph,
    sub: Subgraph,
    z_q: np.ndarray,
    phi1: MlpWeights,
    phi2: MlpWeights,
    embedder,
) -> RelevanceScales:
    """One alpha per node and edge of ``sub``, conditioned on the query."""
    z_q = np.asarray(z_q, dtype=np.float64)
    _check_scale_head("phi1", phi1, z_q.shape[0])
    _check_scale_head("phi2", phi2, z_q.shape[0])

    node_ids = sub.sorted_nodes()
    edge_ids = sub.sorted_edges()
    node_texts = [g.node_text(n) for n in node_ids]
    edge_texts = [g.edges[e].text for e in edge_ids]
    vectors = embedder.embed_texts(node_texts + edge_texts)

    node_alpha: dict[int, float] = {}
    for nid, z in zip(node_ids, vectors[: len(node_ids)]):
        try:
            node_alpha[nid] = _scale(phi1, z, z_q)
        except GragError as exc:
            raise type(exc)(f"node {nid}: {exc}") from exc

    edge_alpha: dict[int, float] = {}
    for eid, z in zip(edge_ids, vectors[len(node_ids) :]):
        try:
            edge_alpha[eid] = _scale(phi2, z, z_q)
        except GragError as exc:
            raise type(exc)(f"edge {eid}: {exc}") from exc

    return RelevanceScales(node_alpha=node_alpha, edge_alpha=edge_alpha)


def merge_pruned(
    ranked: list[RankedSubgraph],
    g: TextGraph,
    query: str,
    z_q: np.ndarray,
    phi1: MlpWeights,
    phi2: MlpWeights,
    embedder,
) -> PrunedSubgraph:
    """Union the top-N ego-graphs and attach relevance scales."""
    if not ranked:
        raise ValueError("merge_pruned needs a non-empty ranking")
    parts = [ego_graph(g, r.entry.center, r.entry.k) for r in ranked]
    sub = union_subgraphs(parts)
    scales = relevance_scales(g, sub, z_q, phi1, phi2, embedder)
    query_ref = hashlib.sha256(query.encode("utf-8")).hexdigest()
    return PrunedSubgraph(sub=sub, scales=scales, query_ref=query_ref)
