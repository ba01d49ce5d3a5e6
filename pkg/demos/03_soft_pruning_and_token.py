"""
Soft pruning and the graph token
================================

Retrieved ego-graphs are merged; every node and edge gets a relevance
scale in (0, 1) conditioned on the query. The scales mask contributions
inside the graph encoder, whose readout is projected to a single
LLM-dimension "graph token". Setting a scale to zero is exactly
equivalent to deleting that entity's features.
"""

import numpy as np

from grag import (
    HashEmbedder,
    PipelineWeights,
    build_index,
    load_graph,
    run_query,
)
from grag.weights import default_pipeline_weights

graph = load_graph(
    {
        "nodes": [{"id": i, "text": f"concept number {i}"} for i in range(6)],
        "edges": [
            {"src": 0, "dst": 1, "text": "supports"},
            {"src": 1, "dst": 2, "text": "refutes"},
            {"src": 2, "dst": 3, "text": "extends"},
            {"src": 3, "dst": 4, "text": "supports"},
            {"src": 4, "dst": 5, "text": "cites"},
            {"src": 5, "dst": 0, "text": "extends"},
        ],
    }
)

embedder = HashEmbedder(dim=32)
index = build_index(graph, k=1, embedder=embedder)

# Untrained seeded defaults keep the pipeline deterministic end to end.
phi1, phi2, gnn, phi3 = default_pipeline_weights(dim=32, d_llm=16)
weights = PipelineWeights(phi1=phi1, phi2=phi2, gnn=gnn, phi3=phi3)

bundle = run_query(
    graph, index, "which concept supports concept number 1?", top_n=2,
    weights=weights, embedder=embedder,
)

print("hard prompt:")
print(bundle.hard_prompt)
print("\ngraph token (first 6 of", bundle.d_llm, "dims):")
print(np.round(bundle.graph_token.values[:6], 5))
print("\nprovenance:")
for key, value in bundle.provenance.items():
    print(f"  {key}: {value}")
