"""Sidecar protocol tests (run against the in-process app)."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from embed_sidecar.encoders import DevEncoder, load_encoder
from embed_sidecar.server import ServerConfig, create_app

# Shared with the primary engine's client tests: both sides must match it.
GOLDEN_PATH = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "remote_protocol_golden.json"


@pytest.fixture(scope="module")
def client():
    app = create_app(ServerConfig(model_name="dev", max_batch=64, dev_dim=32))
    with TestClient(app) as c:
        yield c


class TestProtocol:
    def test_info(self, client):
        resp = client.get("/info")
        assert resp.status_code == 200
        body = resp.json()
        assert body["dim"] == 32
        assert body["model"] == "dev-hash-v1"

    def test_health(self, client):
        assert client.get("/health").status_code == 200

    def test_embed_count_and_dim(self, client):
        texts = ["a", "bb", "ccc", ""]
        resp = client.post("/embed", json={"texts": texts})
        assert resp.status_code == 200
        embeddings = resp.json()["embeddings"]
        assert len(embeddings) == len(texts)
        dim = client.get("/info").json()["dim"]
        assert all(len(vec) == dim for vec in embeddings)

    def test_same_text_identical_vectors(self, client):
        resp = client.post("/embed", json={"texts": ["twice", "twice"]})
        a, b = resp.json()["embeddings"]
        assert a == b
        again = client.post("/embed", json={"texts": ["twice"]}).json()["embeddings"][0]
        assert again == a

    def test_empty_batch_ok(self, client):
        resp = client.post("/embed", json={"texts": []})
        assert resp.status_code == 200
        assert resp.json()["embeddings"] == []

    def test_oversized_batch_413(self, client):
        resp = client.post("/embed", json={"texts": ["x"] * 65})
        assert resp.status_code == 413

    def test_malformed_json_400(self, client):
        resp = client.post(
            "/embed", content=b"{not json", headers={"Content-Type": "application/json"}
        )
        assert resp.status_code == 400
        resp = client.post("/embed", json={"wrong_key": ["a"]})
        assert resp.status_code == 400

    def test_dim_constant_across_requests(self, client):
        dims = set()
        for texts in (["one"], ["two", "three"], ["four"]):
            embeddings = client.post("/embed", json={"texts": texts}).json()["embeddings"]
            dims.update(len(v) for v in embeddings)
        assert dims == {32}


class TestGoldenFixture:
    def test_server_reproduces_golden_response(self, client):
        golden = json.loads(GOLDEN_PATH.read_text(encoding="utf-8"))
        info = client.get("/info").json()
        assert info == golden["info"]
        resp = client.post("/embed", json=golden["request"])
        assert resp.status_code == 200
        assert resp.json()["embeddings"] == golden["response"]["embeddings"]


class TestEncoders:
    def test_dev_encoder_deterministic(self):
        a = DevEncoder(dim=32).encode(["solar flare"])
        b = DevEncoder(dim=32).encode(["solar flare"])
        assert a == b

    def test_dev_encoder_dim_floor(self):
        with pytest.raises(ValueError):
            DevEncoder(dim=4)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError, match="unknown model"):
            load_encoder("bogus")


def _sentence_model_or_none():
    try:
        return load_encoder("st:all-MiniLM-L6-v2")
    except Exception:
        return None


@pytest.mark.skipif(
    _sentence_model_or_none() is None,
    reason="no downloadable sentence encoder in this environment",
)
class TestSemanticSanity:
    def test_cat_dog_closer_than_cat_carburetor(self):
        import numpy as np

        encoder = _sentence_model_or_none()
        cat, dog, carb = (np.array(v) for v in encoder.encode(["cat", "dog", "carburetor"]))

        def cos(a, b):
            return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

        assert cos(cat, dog) > cos(cat, carb)
