"""
Using the embedding sidecar
===========================

The engine can pull embeddings from any server speaking the remote
protocol (GET /info, POST /embed). Start the sidecar first::

    pip install -e ./sidecar
    python -m embed_sidecar --port 8750

then run this script. Falls back with a message if no server is up.
"""

import sys

from grag import EmbedderConfig, RemoteEmbedder, build_index, load_graph, rank_top_n
from grag.errors import TransportError

ENDPOINT = "http://127.0.0.1:8750"

graph = load_graph(
    {
        "nodes": [
            {"id": 0, "text": "a cat sleeping on the windowsill"},
            {"id": 1, "text": "a dog chasing the mail truck"},
            {"id": 2, "text": "carburetor maintenance schedule"},
        ],
        "edges": [
            {"src": 0, "dst": 1, "text": "same household"},
            {"src": 1, "dst": 2, "text": "unrelated"},
        ],
    }
)

embedder = RemoteEmbedder(
    EmbedderConfig(kind="remote", endpoint=ENDPOINT, retries=0, timeout=3.0)
)
try:
    dim = embedder.dim
except TransportError:
    sys.exit(f"no sidecar at {ENDPOINT}; start it and re-run")

print(f"sidecar model: {embedder.model} (dim {dim})")
index = build_index(graph, k=1, embedder=embedder)
ranked = rank_top_n(index, embedder.embed_text("pets at home"), n=3)
for item in ranked:
    print(f"rank {item.rank}: node #{item.entry.center}  cosine={item.score:.4f}")
