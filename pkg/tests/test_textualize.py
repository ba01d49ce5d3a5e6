"""textualizer: BFS split, rendering, parsing, round-trip losslessness."""

from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grag.embedding import HashEmbedder
from grag.errors import DescriptionParseError, DisconnectedError
from grag.graph import Subgraph, TextGraph, ego_graph
from grag.index import build_index, rank_top_n
from grag.textualize import (
    describe_retrieval,
    describe_subgraph,
    escape_text,
    parse_description,
    parse_retrieval,
    render_description,
    split_bfs,
)

from conftest import random_connected_graph
from oracles import bfs_tree_edge_count


def whole_graph(g: TextGraph, center: int) -> Subgraph:
    return Subgraph(
        graph=g,
        node_ids=frozenset(g.nodes),
        edge_ids=frozenset(e.edge_id for e in g.edges),
        center=center,
    )


def edge_multiset(g: TextGraph) -> Counter:
    return Counter((e.src, e.dst, e.text) for e in g.edges)


class TestSplitBfs:
    def test_triangle_forced_ordering(self):
        g = TextGraph({0: "a", 1: "b", 2: "c"}, [(0, 1, "x"), (0, 2, "y"), (1, 2, "z")])
        tree, residual = split_bfs(whole_graph(g, 0), g, 0)
        assert {(c.node, c.edge_id) for c in tree.children[0]} == {(1, 0), (2, 1)}
        assert residual.edge_ids == (2,)

    def test_tree_shaped_input_no_residual(self):
        g = TextGraph(
            {0: "r", 1: "a", 2: "b", 3: "c"},
            [(0, 1, "x"), (0, 2, "y"), (2, 3, "z")],
        )
        _tree, residual = split_bfs(whole_graph(g, 0), g, 0)
        assert residual.edge_ids == ()

    def test_partition_matches_spanning_oracle(self):
        rng = random.Random(1)
        for _ in range(40):
            g = random_connected_graph(rng, max_nodes=30, max_edges=80)
            root = rng.choice(sorted(g.nodes))
            tree, residual = split_bfs(whole_graph(g, root), g, root)
            tree_edges = {
                c.edge_id for kids in tree.children.values() for c in kids
            }
            n_tree = bfs_tree_edge_count(
                sorted(g.nodes), [(e.src, e.dst) for e in g.edges], root
            )
            assert len(tree_edges) == n_tree == g.node_count() - 1
            assert tree_edges.isdisjoint(residual.edge_ids)
            assert tree_edges | set(residual.edge_ids) == {e.edge_id for e in g.edges}

    def test_disconnected_error_lists_nodes(self):
        g = TextGraph({0: "a", 1: "b", 2: "c"}, [(0, 1, "x")])
        with pytest.raises(DisconnectedError, match=r"\[2\]"):
            split_bfs(whole_graph(g, 0), g, 0)

    def test_deterministic_child_order(self):
        # Parallel edges: the lower edge id discovers the child.
        g = TextGraph({0: "a", 1: "b"}, [(0, 1, "first"), (1, 0, "second")])
        tree, residual = split_bfs(whole_graph(g, 0), g, 0)
        child = tree.children[0][0]
        assert (child.node, child.edge_id, child.orientation) == (1, 0, "out")
        assert residual.edge_ids == (1,)


class TestRenderGolden:
    def test_single_node(self):
        g = TextGraph({7: "solar flares"}, [])
        desc = describe_subgraph(whole_graph(g, 7), g)
        assert desc.text == "NODE 1 (#7) [solar flares]"

    def test_two_hop_nested_shape(self):
        # Citation-style 2-hop ego-graph renders as a nested indented list.
        g = TextGraph(
            {0: "root paper", 1: "survey", 2: "method", 3: "old classic"},
            [(0, 1, "cites"), (0, 2, "cites"), (3, 1, "cited by")],
        )
        desc = describe_subgraph(ego_graph(g, 0, 2), g)
        assert desc.text == (
            "NODE 1 (#0) [root paper]\n"
            "  NODE 1.1 (#1) [survey] --[cites]-->\n"
            "    NODE 1.1.1 (#3) [old classic] <--[cited by]--\n"
            "  NODE 1.2 (#2) [method] --[cites]-->"
        )

    def test_residual_cross_section(self):
        g = TextGraph({0: "a", 1: "b", 2: "c"}, [(0, 1, "x"), (0, 2, "y"), (2, 1, "z")])
        desc = describe_subgraph(whole_graph(g, 0), g)
        assert desc.text == (
            "NODE 1 (#0) [a]\n"
            "  NODE 1.1 (#1) [b] --[x]-->\n"
            "  NODE 1.2 (#2) [c] --[y]-->\n"
            "CROSS: #2 --[z]--> #1"
        )

    def test_escaping_golden(self):
        g = TextGraph({0: "has ] bracket", 1: "back\\slash\nnewline"}, [(0, 1, "a]b\\c")])
        desc = describe_subgraph(whole_graph(g, 0), g)
        assert desc.text == (
            "NODE 1 (#0) [has \\] bracket]\n"
            "  NODE 1.1 (#1) [back\\\\slash\\nnewline] --[a\\]b\\\\c]-->"
        )

    def test_self_loop_and_parallel_edges_render_as_cross(self):
        g = TextGraph({0: "a", 1: "b"}, [(0, 1, "keep"), (0, 1, "dup"), (0, 0, "loop")])
        desc = describe_subgraph(whole_graph(g, 0), g)
        assert desc.text.splitlines()[2:] == [
            "CROSS: #0 --[dup]--> #1",
            "CROSS: #0 --[loop]--> #0",
        ]


class TestParse:
    def test_single_node_roundtrip(self):
        g = TextGraph({7: "solar flares"}, [])
        back = parse_description(describe_subgraph(whole_graph(g, 7), g).text)
        assert back.nodes == g.nodes
        assert back.edge_count() == 0

    def test_hand_written_description(self):
        text = (
            "NODE 1 (#10) [question entity]\n"
            "  NODE 1.1 (#4) [answer] <--[derived from]--\n"
            "  NODE 1.2 (#2) [context] --[mentions]-->\n"
            "CROSS: #4 --[related to]--> #2"
        )
        g = parse_description(text)
        assert g.nodes == {10: "question entity", 4: "answer", 2: "context"}
        assert edge_multiset(g) == Counter(
            [(4, 10, "derived from"), (10, 2, "mentions"), (4, 2, "related to")]
        )

    def test_indent_jump_rejected_with_line(self):
        text = (
            "NODE 1 (#0) [a]\n"
            "    NODE 1.1 (#1) [b] --[x]-->"
        )
        with pytest.raises(DescriptionParseError, match="line 2.*depth"):
            parse_description(text)

    def test_duplicate_node_id_rejected(self):
        text = (
            "NODE 1 (#0) [a]\n"
            "  NODE 1.1 (#0) [b] --[x]-->"
        )
        with pytest.raises(DescriptionParseError, match="duplicate node id #0"):
            parse_description(text)

    def test_cross_with_unknown_node_rejected(self):
        text = "NODE 1 (#0) [a]\nCROSS: #0 --[x]--> #9"
        with pytest.raises(DescriptionParseError, match="unknown node #9"):
            parse_description(text)

    def test_node_line_after_cross_rejected(self):
        text = (
            "NODE 1 (#0) [a]\n"
            "CROSS: #0 --[x]--> #0\n"
            "  NODE 1.1 (#1) [b] --[y]-->"
        )
        with pytest.raises(DescriptionParseError, match="line 3"):
            parse_description(text)

    def test_wrong_label_rejected(self):
        text = "NODE 1 (#0) [a]\n  NODE 1.3 (#1) [b] --[x]-->"
        with pytest.raises(DescriptionParseError, match="label"):
            parse_description(text)

    def test_unterminated_text_rejected(self):
        with pytest.raises(DescriptionParseError, match="']'"):
            parse_description("NODE 1 (#0) [unterminated")

    def test_unknown_escape_rejected(self):
        with pytest.raises(DescriptionParseError, match="escape"):
            parse_description("NODE 1 (#0) [bad \\x escape]")

    def test_non_root_without_arrow_rejected(self):
        text = "NODE 1 (#0) [a]\n  NODE 1.1 (#1) [b]"
        with pytest.raises(DescriptionParseError, match="arrow"):
            parse_description(text)


class TestRoundTrip:
    def test_seeded_fuzz_corpus(self):
        rng = random.Random(20240)
        for _ in range(150):
            g = random_connected_graph(rng, max_nodes=25, max_edges=60)
            center = rng.choice(sorted(g.nodes))
            desc = describe_subgraph(whole_graph(g, center), g)
            back = parse_description(desc.text)
            assert back.nodes == g.nodes
            assert edge_multiset(back) == edge_multiset(g)

    @settings(max_examples=100, deadline=None)
    @given(st.text(max_size=40), st.text(max_size=40), st.text(max_size=40))
    def test_arbitrary_texts_roundtrip(self, t0, t1, te):
        g = TextGraph({0: t0, 1: t1}, [(0, 1, te)])
        back = parse_description(describe_subgraph(whole_graph(g, 0), g).text)
        assert back.nodes == g.nodes
        assert edge_multiset(back) == edge_multiset(g)

    @settings(max_examples=60, deadline=None)
    @given(st.text(max_size=60))
    def test_escape_unescape_identity(self, text):
        escaped = escape_text(text)
        assert "\n" not in escaped
        g = TextGraph({0: text}, [])
        back = parse_description(describe_subgraph(whole_graph(g, 0), g).text)
        assert back.nodes[0] == text


class TestDescribeRetrieval:
    def _ranked(self, g, emb, n, k=1):
        idx = build_index(g, k, emb)
        z_q = emb.embed_text("question")
        return rank_top_n(idx, z_q, n)

    def test_single_entry(self):
        g = TextGraph({0: "only"}, [])
        emb = HashEmbedder(dim=16)
        ranked = self._ranked(g, emb, 1)
        text = describe_retrieval(ranked, g)
        lines = text.splitlines()
        assert lines[0].startswith("SUBGRAPH 1 (center #0, score ")
        assert lines[1] == "NODE 1 (#0) [only]"

    def test_sections_in_rank_order(self):
        rng = random.Random(6)
        g = random_connected_graph(rng, max_nodes=15, max_edges=30)
        emb = HashEmbedder(dim=16)
        ranked = self._ranked(g, emb, 3)
        text = describe_retrieval(ranked, g)
        headers = [l for l in text.splitlines() if l.startswith("SUBGRAPH ")]
        assert len(headers) == len(ranked)
        for header, item in zip(headers, ranked):
            assert header.startswith(
                f"SUBGRAPH {item.rank} (center #{item.entry.center}, score "
            )

    def test_each_section_parses_back_to_its_ego_graph(self):
        rng = random.Random(13)
        g = random_connected_graph(rng, max_nodes=20, max_edges=50)
        emb = HashEmbedder(dim=16)
        ranked = self._ranked(g, emb, 3, k=2)
        sections = parse_retrieval(describe_retrieval(ranked, g))
        assert len(sections) == len(ranked)
        for (header, parsed), item in zip(sections, ranked):
            ego = ego_graph(g, item.entry.center, item.entry.k)
            assert header.center == item.entry.center
            assert set(parsed.nodes) == ego.node_ids
            want = Counter(
                (g.edges[e].src, g.edges[e].dst, g.edges[e].text) for e in ego.edge_ids
            )
            assert edge_multiset(parsed) == want

    def test_empty_ranking_rejected(self):
        g = TextGraph({0: "a"}, [])
        with pytest.raises(ValueError):
            describe_retrieval([], g)


class TestDescriptionLength:
    def test_length_linear_for_bounded_radius_subgraphs(self):
        # Ego-graphs have BFS depth <= K, so indentation cost is a constant
        # factor and rendered length scales with |V| + |E|.
        def rendered_len(spokes):
            nodes = {0: "center text"}
            edges = []
            for i in range(1, spokes + 1):
                nodes[i] = f"spoke {i}"
                nodes[spokes + i] = f"leaf {i}"
                edges.append((0, i, "spoke edge"))
                edges.append((i, spokes + i, "leaf edge"))
                edges.append((i, (i % spokes) + 1, "cross edge"))
            g = TextGraph(nodes, edges)
            return len(describe_subgraph(ego_graph(g, 0, 2), g).text)

        small, large = rendered_len(50), rendered_len(100)
        assert large <= 2.2 * small
