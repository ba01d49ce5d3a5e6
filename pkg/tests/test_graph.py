"""graph-core: loading, neighborhoods, ego-graphs, unions."""

from __future__ import annotations

import random

import pytest

from grag.errors import DocumentError, NotFoundError, ReferentialError
from grag.graph import (
    TextGraph,
    ego_graph,
    k_hop_neighborhood,
    load_graph,
    load_graph_csv,
    load_graph_json,
    union_subgraphs,
)

from conftest import random_graph
from oracles import floyd_warshall


def path_graph(n: int) -> TextGraph:
    return TextGraph(
        {i: f"n{i}" for i in range(n)},
        [(i, i + 1, f"e{i}") for i in range(n - 1)],
    )


class TestLoadGraph:
    def test_json_document(self):
        g = load_graph(
            {
                "nodes": [{"id": 0, "text": "a"}, {"id": 1, "text": "b"}],
                "edges": [{"src": 0, "dst": 1, "text": "r"}],
            }
        )
        assert g.node_count() == 2
        assert g.edge_count() == 1
        assert g.edges[0].text == "r"

    def test_dangling_endpoint_is_referential_error(self):
        with pytest.raises(ReferentialError, match="edge 0.*node 9"):
            load_graph(
                {
                    "nodes": [{"id": 0, "text": "a"}, {"id": 1, "text": "b"}],
                    "edges": [{"src": 0, "dst": 9, "text": "r"}],
                }
            )

    def test_duplicate_node_id_rejected(self):
        with pytest.raises(DocumentError, match="duplicate node id 3"):
            load_graph_json(
                {"nodes": [{"id": 3, "text": "a"}, {"id": 3, "text": "b"}], "edges": []}
            )

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"nodes": [\n  {"id": }\n]}', encoding="utf-8")
        with pytest.raises(DocumentError, match="line 2"):
            load_graph(path)

    def test_negative_or_bool_ids_rejected(self):
        with pytest.raises(DocumentError):
            load_graph_json({"nodes": [{"id": -1, "text": "a"}], "edges": []})
        with pytest.raises(DocumentError):
            load_graph_json({"nodes": [{"id": True, "text": "a"}], "edges": []})

    def test_csv_pair(self, tmp_path):
        (tmp_path / "nodes.csv").write_text(
            'node_id,node_attr\n0,"solar, flares"\n1,corona\n', encoding="utf-8"
        )
        (tmp_path / "edges.csv").write_text(
            "src,edge_attr,dst\n0,heats,1\n", encoding="utf-8"
        )
        g = load_graph(tmp_path)
        assert g.nodes == {0: "solar, flares", 1: "corona"}
        assert (g.edges[0].src, g.edges[0].dst, g.edges[0].text) == (0, 1, "heats")

    def test_csv_bad_header(self, tmp_path):
        nodes = tmp_path / "nodes.csv"
        edges = tmp_path / "edges.csv"
        nodes.write_text("id,attr\n0,a\n", encoding="utf-8")
        edges.write_text("src,edge_attr,dst\n", encoding="utf-8")
        with pytest.raises(DocumentError, match="expected header"):
            load_graph_csv(nodes, edges)

    def test_fingerprint_source_independent(self, tmp_path):
        doc = {
            "nodes": [{"id": 1, "text": "b"}, {"id": 0, "text": "a"}],
            "edges": [{"src": 0, "dst": 1, "text": "r"}],
        }
        g1 = load_graph_json(doc)
        (tmp_path / "nodes.csv").write_text(
            "node_id,node_attr\n0,a\n1,b\n", encoding="utf-8"
        )
        (tmp_path / "edges.csv").write_text("src,edge_attr,dst\n0,r,1\n", encoding="utf-8")
        g2 = load_graph(tmp_path)
        assert g1.fingerprint() == g2.fingerprint()
        g3 = load_graph_json(
            {"nodes": doc["nodes"], "edges": [{"src": 0, "dst": 1, "text": "other"}]}
        )
        assert g3.fingerprint() != g1.fingerprint()


class TestKHopNeighborhood:
    def test_path_graph_two_hops(self):
        g = path_graph(4)
        assert k_hop_neighborhood(g, 0, 2) == {0, 1, 2}

    def test_isolated_node(self):
        g = TextGraph({7: "lonely"}, [])
        assert k_hop_neighborhood(g, 7, 5) == {7}

    def test_unknown_center(self):
        with pytest.raises(NotFoundError):
            k_hop_neighborhood(path_graph(3), 99, 1)

    def test_direction_ignored(self):
        g = TextGraph({0: "a", 1: "b"}, [(1, 0, "back")])
        assert k_hop_neighborhood(g, 0, 1) == {0, 1}

    def test_matches_floyd_warshall_oracle(self):
        rng = random.Random(1234)
        for _ in range(25):
            g = random_graph(rng, max_nodes=30, max_edges=60)
            ids = sorted(g.nodes)
            dist = floyd_warshall(ids, [(e.src, e.dst) for e in g.edges])
            for center in ids:
                for k in (1, 2, 3):
                    expected = {v for v in ids if dist[center][v] <= k}
                    assert k_hop_neighborhood(g, center, k) == expected

    def test_monotone_in_k(self):
        rng = random.Random(99)
        for _ in range(10):
            g = random_graph(rng)
            for center in sorted(g.nodes):
                prev: set[int] = set()
                for k in (1, 2, 3, 4):
                    cur = k_hop_neighborhood(g, center, k)
                    assert prev <= cur
                    prev = cur


class TestEgoGraph:
    def test_triangle_closure(self):
        g = TextGraph({0: "a", 1: "b", 2: "c"}, [(0, 1, "x"), (0, 2, "y"), (1, 2, "z")])
        sub = ego_graph(g, 0, 1)
        assert sub.node_ids == {0, 1, 2}
        assert sub.edge_ids == {0, 1, 2}
        assert (sub.center, sub.hops) == (0, 1)

    def test_path_two_hops(self):
        g = path_graph(4)
        sub = ego_graph(g, 0, 2)
        assert sub.node_ids == {0, 1, 2}
        assert sub.edge_ids == {0, 1}

    def test_matches_edge_filter_oracle(self):
        rng = random.Random(777)
        for _ in range(20):
            g = random_graph(rng)
            for center in list(sorted(g.nodes))[:5]:
                for k in (1, 2):
                    sub = ego_graph(g, center, k)
                    expected_edges = {
                        e.edge_id
                        for e in g.edges
                        if e.src in sub.node_ids and e.dst in sub.node_ids
                    }
                    assert sub.edge_ids == expected_edges

    def test_covers_component_for_large_k(self):
        g = path_graph(6)
        sub = ego_graph(g, 0, 10)
        assert sub.node_ids == set(range(6))


class TestUnionSubgraphs:
    def test_idempotent(self):
        g = path_graph(4)
        sub = ego_graph(g, 0, 1)
        merged = union_subgraphs([sub, sub])
        assert merged.node_ids == sub.node_ids
        assert merged.edge_ids == sub.edge_ids
        assert merged.center is None and merged.hops is None

    def test_disjoint_union(self):
        g = TextGraph({0: "a", 1: "b", 2: "c", 3: "d"}, [(0, 1, "x"), (2, 3, "y")])
        merged = union_subgraphs([ego_graph(g, 0, 1), ego_graph(g, 2, 1)])
        assert merged.node_ids == {0, 1, 2, 3}

    def test_order_independent(self):
        rng = random.Random(5)
        g = random_graph(rng, max_nodes=20)
        subs = [ego_graph(g, c, 1) for c in list(sorted(g.nodes))[:4]]
        a = union_subgraphs(subs)
        b = union_subgraphs(list(reversed(subs)))
        assert (a.node_ids, a.edge_ids) == (b.node_ids, b.edge_ids)

    def test_matches_set_union_oracle(self):
        rng = random.Random(31)
        for _ in range(10):
            g = random_graph(rng, max_nodes=40, max_edges=120)
            centers = list(sorted(g.nodes))[:5]
            subs = [ego_graph(g, c, 2) for c in centers]
            merged = union_subgraphs(subs)
            assert merged.node_ids == set().union(*(s.node_ids for s in subs))
            assert merged.edge_ids == set().union(*(s.edge_ids for s in subs))

    def test_mixed_parents_rejected(self):
        g1, g2 = path_graph(3), path_graph(3)
        with pytest.raises(ValueError, match="different parent"):
            union_subgraphs([ego_graph(g1, 0, 1), ego_graph(g2, 0, 1)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            union_subgraphs([])


class TestSubgraphInvariants:
    def test_edge_endpoints_must_be_inside(self):
        from grag.graph import Subgraph

        g = path_graph(3)
        with pytest.raises(ReferentialError):
            Subgraph(graph=g, node_ids=frozenset({0}), edge_ids=frozenset({0}))

    def test_ego_graph_checkable_by_rerunning_bfs(self):
        rng = random.Random(41)
        g = random_graph(rng, max_nodes=25, max_edges=60)
        center = sorted(g.nodes)[0]
        sub = ego_graph(g, center, 2)
        assert sub.node_ids == k_hop_neighborhood(g, sub.center, sub.hops)
