"""
Lossless hierarchical descriptions
==================================

An ego-graph splits into a BFS spanning tree plus residual edges. The tree
renders as a nested indented list; residual edges become CROSS triples.
The text parses back to exactly the same graph - ids, texts, directions.
"""

from collections import Counter

from grag import describe_subgraph, ego_graph, load_graph, parse_description

graph = load_graph(
    {
        "nodes": [
            {"id": 10, "text": "solar flare"},
            {"id": 11, "text": "magnetic reconnection"},
            {"id": 12, "text": "corona"},
            {"id": 13, "text": "weird ] text with \\ and\nnewline"},
        ],
        "edges": [
            {"src": 10, "dst": 11, "text": "caused by"},
            {"src": 11, "dst": 12, "text": "occurs in"},
            {"src": 12, "dst": 10, "text": "hosts"},
            {"src": 10, "dst": 13, "text": "notes"},
            {"src": 10, "dst": 11, "text": "also caused by"},  # parallel edge
        ],
    }
)

sub = ego_graph(graph, center=10, k=2)
description = describe_subgraph(sub, graph)
print(description.text)

# The inverse parser reconstructs the subgraph exactly.
restored = parse_description(description.text)
assert restored.nodes == graph.nodes
assert Counter((e.src, e.dst, e.text) for e in restored.edges) == Counter(
    (e.src, e.dst, e.text) for e in graph.edges
)
print("\nround-trip exact: nodes, texts, and edge multiset all match")
