"""Shared generators and the stub embedding server."""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from grag.embedding import hash_embed
from grag.graph import TextGraph

# Texts that stress the description grammar: escapes, unicode, emptiness.
NASTY_PIECES = [
    "",
    "plain text",
    "with ] bracket",
    "back\\slash",
    "line\nbreak",
    "two ]] brackets \\] mixed",
    "unicode: café δφ 北京",
    "[open bracket",
    "trailing backslash\\",
    "tab\tand\rcarriage",
    "   spaces   ",
    "-->",
    "<--",
    "NODE 1 (#0) [decoy]",
    "CROSS: #1 --[decoy]--> #2",
]


def random_text(rng: random.Random) -> str:
    if rng.random() < 0.5:
        return rng.choice(NASTY_PIECES)
    alphabet = "ab ]\\\n#[]-><.0é"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))


def random_connected_graph(
    rng: random.Random, max_nodes: int = 50, max_edges: int = 200
) -> TextGraph:
    """Connected multigraph with parallel edges, self-loops, nasty texts."""
    n = rng.randint(1, max_nodes)
    nodes = {i: random_text(rng) for i in range(n)}
    edges: list[tuple[int, int, str]] = []
    # Spanning tree first so the graph is connected.
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        child = order[i]
        parent = order[rng.randint(0, i - 1)]
        if rng.random() < 0.5:
            edges.append((parent, child, random_text(rng)))
        else:
            edges.append((child, parent, random_text(rng)))
    extra = rng.randint(0, max(0, max_edges - len(edges)))
    for _ in range(extra):
        u = rng.randrange(n)
        v = u if rng.random() < 0.1 else rng.randrange(n)  # some self-loops
        edges.append((u, v, random_text(rng)))
    return TextGraph(nodes, edges)


def random_graph(rng: random.Random, max_nodes: int = 30, max_edges: int = 60) -> TextGraph:
    """Arbitrary (possibly disconnected) multigraph."""
    n = rng.randint(1, max_nodes)
    nodes = {i: random_text(rng) for i in range(n)}
    edges = []
    for _ in range(rng.randint(0, max_edges)):
        edges.append((rng.randrange(n), rng.randrange(n), random_text(rng)))
    return TextGraph(nodes, edges)


def bounded_degree_graph(n: int, max_degree: int, seed: int) -> TextGraph:
    """Connected graph with every degree <= max_degree (ring + chords)."""
    rng = random.Random(seed)
    nodes = {i: f"node {i} {rng.random():.6f}" for i in range(n)}
    degree = [2] * n
    edges = [(i, (i + 1) % n, f"ring {i}") for i in range(n)]
    if n <= 2:
        return TextGraph(nodes, edges[: max(0, n - 1)])
    for _ in range(n):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v and degree[u] < max_degree and degree[v] < max_degree:
            edges.append((u, v, f"chord {u}-{v}"))
            degree[u] += 1
            degree[v] += 1
    return TextGraph(nodes, edges)


class _StubState:
    """Mutable knobs for the stub embedding server."""

    def __init__(self, dim: int = 16):
        self.dim = dim
        self.requests: list[dict] = []
        self.fail_next = 0  # respond 500 to this many /embed calls
        self.wrong_count = False  # drop one vector from the response
        self.lock = threading.Lock()


class _StubHandler(BaseHTTPRequestHandler):
    state: _StubState

    def log_message(self, *args):  # keep pytest output clean
        pass

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/info":
            self._send_json({"dim": self.state.dim, "model": "stub"})
        elif self.path == "/health":
            self._send_json({"status": "ok"})
        else:
            self._send_json({"error": "not found"}, status=404)

    def do_POST(self):
        if self.path != "/embed":
            self._send_json({"error": "not found"}, status=404)
            return
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        with self.state.lock:
            self.state.requests.append(payload)
            if self.state.fail_next > 0:
                self.state.fail_next -= 1
                self._send_json({"error": "transient"}, status=500)
                return
        texts = payload["texts"]
        vectors = [hash_embed(t, self.state.dim, "stub").tolist() for t in texts]
        if self.state.wrong_count and vectors:
            vectors = vectors[:-1]
        self._send_json({"embeddings": vectors})


@pytest.fixture
def stub_embed_server():
    """A protocol-conformant embedding server on an ephemeral port."""
    state = _StubState()
    handler = type("Handler", (_StubHandler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    endpoint = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        yield endpoint, state
    finally:
        server.shutdown()
        thread.join(timeout=5)
