"""
Indexing a textual graph and retrieving ego-graphs
==================================================

Build a small citation-style graph, index every node's 2-hop ego-graph,
and rank them against a question.
"""

from grag import HashEmbedder, build_index, load_graph, rank_top_n

# A textual graph: every node and edge carries natural-language text.
graph = load_graph(
    {
        "nodes": [
            {"id": 0, "text": "Predicting solar flares with deep learning"},
            {"id": 1, "text": "A survey of magnetic reconnection"},
            {"id": 2, "text": "Transformers for time series"},
            {"id": 3, "text": "Coronal mass ejections and space weather"},
            {"id": 4, "text": "Gradient boosting for tabular data"},
        ],
        "edges": [
            {"src": 0, "dst": 1, "text": "cites"},
            {"src": 0, "dst": 2, "text": "builds on"},
            {"src": 3, "dst": 0, "text": "cites"},
            {"src": 3, "dst": 1, "text": "cites"},
            {"src": 4, "dst": 2, "text": "compares against"},
        ],
    }
)

# The hash embedder is a deterministic stand-in for a sentence encoder;
# swap in RemoteEmbedder to use the sidecar's real model.
embedder = HashEmbedder(dim=64)

# One entry per node: the pooled embedding of its 2-hop ego-graph.
index = build_index(graph, k=2, embedder=embedder)
print(f"indexed {len(index.entries)} ego-graphs, dim={index.dim}")
for entry in index.entries:
    print(f"  center #{entry.center}: {entry.node_count} nodes, {entry.edge_count} edges")

# Rank all candidates against the query embedding - exact scan, no ANN.
question = "how do magnetic fields trigger solar flares?"
ranked = rank_top_n(index, embedder.embed_text(question), n=3)
print(f"\ntop-3 for {question!r}:")
for item in ranked:
    print(f"  rank {item.rank}: center #{item.entry.center}  cosine={item.score:.4f}")
