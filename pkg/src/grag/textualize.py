"""Lossless conversion between subgraphs and hierarchical text descriptions.

A connected subgraph splits into a BFS spanning tree plus the residual
edges the tree leaves out. The tree renders as a nested, indented list in
pre-order; residual edges follow as explicit triples. The grammar (UTF-8,
LF, two spaces of indent per depth) is::

    node-line    := indent "NODE " dotted-label " (#" int ")" " [" etext "]" arrow?
    arrow        := " --[" etext "]-->"      edge runs parent -> child
                  | " <--[" etext "]--"      edge runs child -> parent
    cross-line   := "CROSS: #" int " --[" etext "]--> #" int
    section-line := "SUBGRAPH " int " (center #" int ", score " decimal ")"

Inside a bracketed text, backslash escapes ``\\``, ``]`` and newline
(``\\n``); everything else is literal. Node ids appear in the output
because duplicate node texts are legal and round-tripping must reproduce
identity, not just wording. parse(render(x)) == x exactly: same node ids,
same texts, same edge multiset with directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

from .errors import DescriptionParseError, DisconnectedError, NotFoundError
from .graph import Subgraph, TextGraph, ego_graph

TEMPLATE_VERSION = "grag-hier-v1"

INDENT = "  "
_ESCAPES = {"\\": "\\\\", "]": "\\]", "\n": "\\n"}
_UNESCAPES = {"\\": "\\", "]": "]", "n": "\n"}


@dataclass(frozen=True)
class TreeChild:
    node: int
    edge_id: int
    orientation: str  # "out": edge parent->child; "in": edge child->parent


@dataclass(frozen=True)
class TreeView:
    """BFS spanning tree; children per node in discovery order."""

    root: int
    children: dict[int, tuple[TreeChild, ...]]


@dataclass(frozen=True)
class ResidualEdges:
    edge_ids: tuple[int, ...]  # ascending


@dataclass(frozen=True)
class HierDescription:
    text: str
    tree: TreeView
    residual: ResidualEdges
    template_version: str = TEMPLATE_VERSION


def escape_text(text: str) -> str:
    out = []
    for ch in text:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def split_bfs(sub: Subgraph, g: TextGraph, root: int) -> tuple[TreeView, ResidualEdges]:
    """Split a subgraph into a BFS spanning tree and residual edges.

    Neighbors expand in ascending (neighbor id, edge id) order; the first
    edge that discovers a node becomes its tree edge. Fully deterministic.
    """
    if root not in sub.node_ids:
        raise NotFoundError(f"root {root} not in subgraph")

    children: dict[int, list[TreeChild]] = {root: []}
    tree_edges: set[int] = set()
    visited = {root}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for nbr, eid in g.adjacency(node):
            if eid not in sub.edge_ids or nbr in visited:
                continue
            visited.add(nbr)
            tree_edges.add(eid)
            orientation = "out" if g.edges[eid].src == node else "in"
            children.setdefault(node, []).append(TreeChild(nbr, eid, orientation))
            children.setdefault(nbr, [])
            queue.append(nbr)

    unreachable = sub.node_ids - visited
    if unreachable:
        raise DisconnectedError(
            f"nodes unreachable from root {root}: {sorted(unreachable)}"
        )

    residual = tuple(sorted(sub.edge_ids - tree_edges))
    tree = TreeView(root=root, children={n: tuple(c) for n, c in children.items()})
    return tree, ResidualEdges(edge_ids=residual)


def render_description(
    tree: TreeView, residual: ResidualEdges, g: TextGraph, sub: Subgraph
) -> str:
    """Pre-order rendering of the tree plus a trailing CROSS section."""
    lines: list[str] = []
    # Stack carries (node, depth, dotted label, arrow text or None).
    stack: list[tuple[int, int, str, str | None]] = [(tree.root, 0, "1", None)]
    while stack:
        node, depth, label, arrow = stack.pop()
        line = f"{INDENT * depth}NODE {label} (#{node}) [{escape_text(g.node_text(node))}]"
        if arrow is not None:
            line += arrow
        lines.append(line)
        kids = tree.children.get(node, ())
        for pos in range(len(kids) - 1, -1, -1):
            child = kids[pos]
            etext = escape_text(g.edges[child.edge_id].text)
            if child.orientation == "out":
                child_arrow = f" --[{etext}]-->"
            else:
                child_arrow = f" <--[{etext}]--"
            stack.append((child.node, depth + 1, f"{label}.{pos + 1}", child_arrow))

    for eid in residual.edge_ids:
        edge = g.edges[eid]
        lines.append(
            f"CROSS: #{edge.src} --[{escape_text(edge.text)}]--> #{edge.dst}"
        )
    return "\n".join(lines)


def describe_subgraph(sub: Subgraph, g: TextGraph, root: int | None = None) -> HierDescription:
    """Split and render in one step; root defaults to the recorded center."""
    if root is None:
        if sub.center is None:
            raise ValueError("subgraph has no center; pass a root explicitly")
        root = sub.center
    tree, residual = split_bfs(sub, g, root)
    text = render_description(tree, residual, g, sub)
    return HierDescription(text=text, tree=tree, residual=residual)


# --- parsing ----------------------------------------------------------------


class _LineScanner:
    """Single-line cursor with exact-token errors."""

    def __init__(self, line: str, lineno: int):
        self.line = line
        self.pos = 0
        self.lineno = lineno

    def fail(self, expected: str) -> DescriptionParseError:
        return DescriptionParseError(
            f"expected {expected} at column {self.pos + 1}", line=self.lineno
        )

    def literal(self, token: str) -> None:
        if not self.line.startswith(token, self.pos):
            raise self.fail(repr(token))
        self.pos += len(token)

    def peek_literal(self, token: str) -> bool:
        return self.line.startswith(token, self.pos)

    def integer(self) -> int:
        start = self.pos
        while self.pos < len(self.line) and self.line[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.fail("an integer")
        return int(self.line[start : self.pos])

    def decimal(self) -> float:
        start = self.pos
        allowed = set("0123456789+-.eE")
        while self.pos < len(self.line) and self.line[self.pos] in allowed:
            self.pos += 1
        try:
            return float(self.line[start : self.pos])
        except ValueError:
            raise self.fail("a decimal number") from None

    def bracketed_text(self) -> str:
        """Consume '[' etext ']' decoding escapes."""
        self.literal("[")
        out: list[str] = []
        while True:
            if self.pos >= len(self.line):
                raise self.fail("']' closing a text")
            ch = self.line[self.pos]
            if ch == "]":
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                if self.pos + 1 >= len(self.line):
                    raise self.fail("an escape character after '\\'")
                esc = self.line[self.pos + 1]
                if esc not in _UNESCAPES:
                    raise DescriptionParseError(
                        f"unknown escape '\\{esc}' at column {self.pos + 2}",
                        line=self.lineno,
                    )
                out.append(_UNESCAPES[esc])
                self.pos += 2
            else:
                out.append(ch)
                self.pos += 1

    def dotted_label(self) -> str:
        start = self.pos
        self.integer()
        while self.peek_literal("."):
            self.pos += 1
            self.integer()
        return self.line[start : self.pos]

    def end(self) -> None:
        if self.pos != len(self.line):
            raise self.fail("end of line")


@dataclass(frozen=True)
class SectionHeader:
    rank: int
    center: int
    score: float


def _parse_section_header(line: str, lineno: int) -> SectionHeader:
    sc = _LineScanner(line, lineno)
    sc.literal("SUBGRAPH ")
    rank = sc.integer()
    sc.literal(" (center #")
    center = sc.integer()
    sc.literal(", score ")
    score = sc.decimal()
    sc.literal(")")
    sc.end()
    return SectionHeader(rank=rank, center=center, score=score)


def _parse_body(lines: list[str], start_lineno: int) -> TextGraph:
    nodes: dict[int, str] = {}
    edges: list[tuple[int, int, str]] = []
    # Path of (node id, label) from the root to the current node, by depth.
    path: list[tuple[int, str]] = []
    child_counts: dict[int, int] = {}
    in_cross = False

    for offset, line in enumerate(lines):
        lineno = start_lineno + offset
        if line.startswith("CROSS: "):
            in_cross = True
            sc = _LineScanner(line, lineno)
            sc.literal("CROSS: #")
            src = sc.integer()
            sc.literal(" --")
            text = sc.bracketed_text()
            sc.literal("--> #")
            dst = sc.integer()
            sc.end()
            for endpoint in (src, dst):
                if endpoint not in nodes:
                    raise DescriptionParseError(
                        f"CROSS references unknown node #{endpoint}", line=lineno
                    )
            edges.append((src, dst, text))
            continue

        if in_cross:
            raise DescriptionParseError(
                "node line after the CROSS section", line=lineno
            )

        # Node line: measure indent first.
        stripped = line.lstrip(" ")
        spaces = len(line) - len(stripped)
        if spaces % 2 != 0:
            raise DescriptionParseError(
                f"indent of {spaces} spaces is not a multiple of 2", line=lineno
            )
        depth = spaces // 2
        sc = _LineScanner(line, lineno)
        sc.pos = spaces
        sc.literal("NODE ")
        label = sc.dotted_label()
        sc.literal(" (#")
        node_id = sc.integer()
        sc.literal(")")
        sc.literal(" ")
        text = sc.bracketed_text()

        arrow: tuple[str, str] | None = None
        if sc.pos < len(sc.line):
            if sc.peek_literal(" --["):
                sc.literal(" --")
                etext = sc.bracketed_text()
                sc.literal("-->")
                arrow = ("out", etext)
            elif sc.peek_literal(" <--["):
                sc.literal(" <--")
                etext = sc.bracketed_text()
                sc.literal("--")
                arrow = ("in", etext)
            else:
                raise sc.fail("' --[' or ' <--[' introducing an arrow")
            sc.end()

        if node_id in nodes:
            raise DescriptionParseError(f"duplicate node id #{node_id}", line=lineno)

        if depth == 0:
            if path:
                raise DescriptionParseError(
                    "second depth-0 node; a description has one root", line=lineno
                )
            if arrow is not None:
                raise DescriptionParseError("root line cannot carry an arrow", line=lineno)
            if label != "1":
                raise DescriptionParseError(
                    f"root label must be '1', got {label!r}", line=lineno
                )
            path = [(node_id, label)]
        else:
            if depth > len(path):
                raise DescriptionParseError(
                    f"indent jumps from depth {len(path) - 1} to {depth}", line=lineno
                )
            if arrow is None:
                raise DescriptionParseError(
                    "non-root line must carry a connecting arrow", line=lineno
                )
            del path[depth:]
            parent_id, parent_label = path[-1]
            ordinal = child_counts.get(parent_id, 0) + 1
            child_counts[parent_id] = ordinal
            expected = f"{parent_label}.{ordinal}"
            if label != expected:
                raise DescriptionParseError(
                    f"label {label!r} does not match position {expected!r}", line=lineno
                )
            direction, etext = arrow
            if direction == "out":
                edges.append((parent_id, node_id, etext))
            else:
                edges.append((node_id, parent_id, etext))
            path.append((node_id, label))

        nodes[node_id] = text

    if not nodes:
        raise DescriptionParseError("description has no node lines", line=start_lineno)
    return TextGraph(nodes, edges)


def parse_description(text: str) -> TextGraph:
    """Parse one description body back into a standalone graph.

    Node ids, node texts, and the edge multiset (src, dst, text, with
    directions) of the source are reconstructed exactly.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DescriptionParseError("empty description", line=1)
    return _parse_body(lines, 1)


def parse_retrieval(text: str) -> list[tuple[SectionHeader, TextGraph]]:
    """Parse a multi-section retrieval description."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("SUBGRAPH "):
        raise DescriptionParseError("expected a 'SUBGRAPH' section header", line=1)

    sections: list[tuple[SectionHeader, TextGraph]] = []
    i = 0
    while i < len(lines):
        header = _parse_section_header(lines[i], i + 1)
        body_start = i + 1
        j = body_start
        while j < len(lines) and not lines[j].startswith("SUBGRAPH "):
            j += 1
        if body_start == j:
            raise DescriptionParseError("section has an empty body", line=i + 1)
        sections.append((header, _parse_body(lines[body_start:j], body_start + 1)))
        i = j
    return sections


# --- retrieval-level description -------------------------------------------


def describe_retrieval(
    ranked,
    g: TextGraph,
    scales=None,
    prune_eps: float | None = None,
) -> str:
    """Concatenated per-ego-graph descriptions in rank order.

    This is the D text used in the hard prompt. With ``prune_eps`` set (and
    ``scales`` given), entities scoring below the threshold are dropped from
    the rendering, keeping the part still reachable from each center.
    """
    if not ranked:
        raise ValueError("describe_retrieval needs a non-empty ranking")
    sections = []
    for item in ranked:
        sub = ego_graph(g, item.entry.center, item.entry.k)
        if prune_eps is not None and scales is not None:
            sub = _hard_drop(sub, g, scales, prune_eps)
        desc = describe_subgraph(sub, g, root=item.entry.center)
        header = f"SUBGRAPH {item.rank} (center #{item.entry.center}, score {item.score!r})"
        sections.append(header + "\n" + desc.text)
    return "\n".join(sections)


def _hard_drop(sub: Subgraph, g: TextGraph, scales, eps: float) -> Subgraph:
    """Drop alpha<eps entities, then keep what the center still reaches."""
    center = sub.center
    kept_nodes = {
        n for n in sub.node_ids if n == center or scales.node_alpha.get(n, 1.0) >= eps
    }
    kept_edges = {
        e
        for e in sub.edge_ids
        if scales.edge_alpha.get(e, 1.0) >= eps
        and g.edges[e].src in kept_nodes
        and g.edges[e].dst in kept_nodes
    }
    # Restrict to the component containing the center so BFS stays total.
    reach = {center}
    queue = deque([center])
    while queue:
        node = queue.popleft()
        for nbr, eid in g.adjacency(node):
            if eid in kept_edges and nbr not in reach:
                reach.add(nbr)
                queue.append(nbr)
    final_edges = frozenset(
        e for e in kept_edges if g.edges[e].src in reach and g.edges[e].dst in reach
    )
    return Subgraph(
        graph=g,
        node_ids=frozenset(reach),
        edge_ids=final_edges,
        center=center,
        hops=sub.hops,
    )
