"""End-to-end query orchestration and prompt-bundle emission.

One query runs: embed the question -> exact top-N ego-graph ranking ->
union + soft pruning -> hierarchical text description (hard prompt) and
relevance-scaled graph encoding projected to a single LLM-dimension token
(soft prompt). The bundle pairs both views with provenance hashes; feeding
it into an actual LLM is out of scope — any client can consume the JSON.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import GraphToken, gnn_forward, project_token, readout
from .errors import DimensionError, FingerprintError, GragError
from .graph import TextGraph
from .index import EgoIndex, rank_top_n
from .pruning import merge_pruned
from .serialize import dumps_canonical
from .textualize import TEMPLATE_VERSION, describe_retrieval
from .weights import GnnWeights, MlpWeights, weight_hash

HARD_PROMPT_TEMPLATE = "Question: {question}\n\nRetrieved graph context:\n{description}\n\nAnswer:"


@dataclass(frozen=True)
class PipelineWeights:
    phi1: MlpWeights  # node scale head
    phi2: MlpWeights  # edge scale head
    gnn: GnnWeights
    phi3: MlpWeights  # token projection

    def hashes(self) -> dict[str, str]:
        return {
            "phi1": weight_hash(self.phi1),
            "phi2": weight_hash(self.phi2),
            "gnn": weight_hash(self.gnn),
            "phi3": weight_hash(self.phi3),
        }


@dataclass(frozen=True)
class PromptBundle:
    query: str
    hard_prompt: str
    graph_token: GraphToken
    d_llm: int
    provenance: dict

    def to_document(self) -> dict:
        return {
            "query": self.query,
            "hard_prompt": self.hard_prompt,
            "d_llm": self.d_llm,
            "graph_token": self.graph_token.values,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return dumps_canonical(self.to_document()) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")


@contextmanager
def _stage(name: str):
    """Re-raise pipeline errors tagged with the stage that produced them."""
    try:
        yield
    except GragError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


def run_query(
    g: TextGraph,
    idx: EgoIndex,
    question: str,
    top_n: int,
    weights: PipelineWeights,
    embedder,
    prune_eps: float | None = None,
) -> PromptBundle:
    """Run the full retrieval-to-prompt pipeline for one question.

    Deterministic end to end: identical inputs produce byte-identical
    bundles.
    """
    if idx.fingerprint != g.fingerprint():
        raise FingerprintError(
            "index fingerprint does not match the graph; rebuild the index"
        )
    if embedder.dim != idx.dim:
        raise DimensionError(
            f"embedder dim {embedder.dim} does not match index dim {idx.dim}"
        )

    with _stage("query-encoding"):
        z_q = np.asarray(embedder.embed_text(question), dtype=np.float64)
    with _stage("ranking"):
        ranked = rank_top_n(idx, z_q, top_n)
    with _stage("soft-pruning"):
        pruned = merge_pruned(ranked, g, question, z_q, weights.phi1, weights.phi2, embedder)
    with _stage("text-view"):
        description = describe_retrieval(
            ranked, g, scales=pruned.scales, prune_eps=prune_eps
        )
    with _stage("graph-view"):
        nodes = pruned.sub.sorted_nodes()
        edges = pruned.sub.sorted_edges()
        node_vecs = embedder.embed_texts([g.node_text(n) for n in nodes])
        edge_vecs = embedder.embed_texts([g.edges[e].text for e in edges])
        node_feats = dict(zip(nodes, node_vecs))
        edge_feats = dict(zip(edges, edge_vecs))
        states = gnn_forward(pruned, weights.gnn, node_feats, edge_feats)
        token = project_token(readout(states), weights.phi3)

    hard_prompt = HARD_PROMPT_TEMPLATE.format(question=question, description=description)
    provenance = {
        "index_fingerprint": idx.fingerprint,
        "k": idx.k,
        "top_n": top_n,
        "template_version": TEMPLATE_VERSION,
        "embedder": embedder.identity,
        "prune_eps": prune_eps,
        "weights": weights.hashes(),
    }
    return PromptBundle(
        query=question,
        hard_prompt=hard_prompt,
        graph_token=token,
        d_llm=token.dim,
        provenance=provenance,
    )
