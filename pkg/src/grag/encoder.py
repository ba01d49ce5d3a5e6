"""Relevance-scaled attention message passing over the pruned subgraph.

The relevance scales multiply the input node and edge features once, up
front; the layers below then see only the masked features. That makes
"alpha = 0 on an entity" exactly equivalent to zeroing its feature vector,
at any depth (re-scaling the hidden state at every layer would break that
equivalence from layer 2 on).

Per layer and head, each node v aggregates messages from u in N(v) union
{v}: m_u = W_nbr h_u + W_edge z_e (the bare self term carries no edge
feature; every parallel edge contributes its own message). Attention logits
are LeakyReLU(a^T [W_self h_v || m_u]), softmax-normalized over the
message list, and the new state is the weighted message sum. Heads
concatenate between layers and average at the final layer. Neighbor sets
ignore edge direction, matching reachability in the graph module.

Everything iterates in canonical (node id, edge id) order, so the forward
pass is bit-stable across runs and schedules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, NumericError
from .pruning import PrunedSubgraph
from .weights import GnnWeights, MlpWeights, mlp_forward


@dataclass(frozen=True)
class GraphToken:
    """The soft-prompt vector in the LLM's embedding space."""

    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise NumericError("graph token contains non-finite values")

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def _leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0.0, x, slope * x)


def gnn_forward(
    pruned: PrunedSubgraph,
    weights: GnnWeights,
    node_feats: dict[int, np.ndarray],
    edge_feats: dict[int, np.ndarray],
) -> dict[int, np.ndarray]:
    """Forward pass; returns the final state vector per node id."""
    sub = pruned.sub
    g = sub.graph
    scales = pruned.scales
    nodes = sub.sorted_nodes()
    edge_ids = sub.sorted_edges()
    node_pos = {nid: i for i, nid in enumerate(nodes)}
    edge_pos = {eid: i for i, eid in enumerate(edge_ids)}

    for nid in nodes:
        if nid not in node_feats:
            raise DataError(f"node {nid} has no feature vector")
        if nid not in scales.node_alpha:
            raise DataError(f"node {nid} has no relevance scale")
    for eid in edge_ids:
        if eid not in edge_feats:
            raise DataError(f"edge {eid} has no feature vector")
        if eid not in scales.edge_alpha:
            raise DataError(f"edge {eid} has no relevance scale")

    h = np.empty((len(nodes), weights.node_dim), dtype=np.float64)
    for i, nid in enumerate(nodes):
        feat = np.asarray(node_feats[nid], dtype=np.float64)
        if feat.shape != (weights.node_dim,):
            raise DimensionError(
                f"node {nid}: feature dim {feat.shape} != node_dim {weights.node_dim}"
            )
        h[i] = scales.node_alpha[nid] * feat

    ze = np.empty((len(edge_ids), weights.edge_dim), dtype=np.float64)
    for i, eid in enumerate(edge_ids):
        feat = np.asarray(edge_feats[eid], dtype=np.float64)
        if feat.shape != (weights.edge_dim,):
            raise DimensionError(
                f"edge {eid}: feature dim {feat.shape} != edge_dim {weights.edge_dim}"
            )
        ze[i] = scales.edge_alpha[eid] * feat

    # Per node: incident (neighbor position, edge position) pairs in
    # ascending (neighbor id, edge id) order; self-loops contribute once.
    incidence: list[list[tuple[int, int]]] = [[] for _ in nodes]
    for eid in edge_ids:
        edge = g.edges[eid]
        s, d = node_pos[edge.src], node_pos[edge.dst]
        incidence[d].append((s, edge_pos[eid]))
        if s != d:
            incidence[s].append((d, edge_pos[eid]))
    for pairs in incidence:
        pairs.sort(key=lambda pair: (nodes[pair[0]], edge_ids[pair[1]]))

    n_layers = len(weights.layers)
    for li, layer in enumerate(weights.layers):
        in_dim = h.shape[1]
        head_outputs: list[np.ndarray] = []
        for hi, head in enumerate(layer.heads):
            if head.w_nbr.shape[1] != in_dim:
                raise DimensionError(
                    f"layer {li} head {hi}: weight input dim {head.w_nbr.shape[1]} "
                    f"!= state dim {in_dim}"
                )
            with np.errstate(over="ignore", invalid="ignore"):
                self_proj = h @ head.w_self.T  # n x h
                nbr_proj = h @ head.w_nbr.T  # n x h
                edge_proj = ze @ head.w_edge.T if len(edge_ids) else ze  # m x h
                a_self, a_msg = head.a[: weights.hidden], head.a[weights.hidden :]

                out = np.empty((len(nodes), weights.hidden), dtype=np.float64)
                for vi in range(len(nodes)):
                    # Bare self term first, then incident edges in canonical order.
                    messages = [nbr_proj[vi]]
                    for ui, ei in incidence[vi]:
                        messages.append(nbr_proj[ui] + edge_proj[ei])
                    m = np.stack(messages)
                    logits = _leaky_relu(
                        float(a_self @ self_proj[vi]) + m @ a_msg, head.slope
                    )
                    logits -= logits.max()
                    w = np.exp(logits)
                    w /= w.sum()
                    out[vi] = w @ m
            if not np.all(np.isfinite(out)):
                raise NumericError(f"non-finite activation at layer {li} head {hi}")
            head_outputs.append(out)

        if li == n_layers - 1:
            h = sum(head_outputs) / len(head_outputs)  # final layer: head average
        else:
            h = np.concatenate(head_outputs, axis=1)

    return {nid: h[i].copy() for i, nid in enumerate(nodes)}


def readout(states: dict[int, np.ndarray]) -> np.ndarray:
    """Mean of the final node states, summed in ascending node-id order."""
    if not states:
        raise ValueError("readout needs at least one node state")
    ordered = np.stack([states[nid] for nid in sorted(states)])
    return ordered.sum(axis=0) / ordered.shape[0]


def project_token(pooled: np.ndarray, phi3: MlpWeights) -> GraphToken:
    """Align the graph readout with the LLM token space (the graph token)."""
    return GraphToken(values=mlp_forward(phi3, pooled))
