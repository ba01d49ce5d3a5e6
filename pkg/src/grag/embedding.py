"""Embedding providers and pooling.

Two providers implement one contract (``dim``, ``identity``,
``embed_texts``): a deterministic local hash embedder used for tests and
offline runs, and an HTTP client for a remote sentence-encoder sidecar.
Both cache vectors per (provider identity, text) so an index build never
embeds the same text twice.

The hash embedder is a signed feature-hashing scheme over FNV-1a-64 token
hashes; it is bit-identical across platforms and carries no semantics
beyond token overlap.
"""

from __future__ import annotations

import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import requests

from .errors import DimensionError, ProtocolError, TransportError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Maximal runs of Unicode alphanumerics (underscore is a separator).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_embed(text: str, dim: int, seed_tag: str) -> np.ndarray:
    """Deterministic signed feature-hash embedding, L2-normalized.

    Tokens are maximal alphanumeric runs of the lowercased text. Each token
    ``t`` hashes to ``h = FNV-1a-64(seed_tag + t)``; it adds ``+1`` or
    ``-1`` (sign from bit 32 parity of ``h``) to bucket ``h mod dim``. A
    text with no tokens yields the zero vector.
    """
    if dim < 8:
        raise ValueError(f"hash embedder dim must be >= 8, got {dim}")
    values = np.zeros(dim, dtype=np.float64)
    for token in _TOKEN_RE.findall(text.lower()):
        h = fnv1a_64((seed_tag + token).encode("utf-8"))
        sign = 1.0 if ((h >> 32) & 1) == 0 else -1.0
        values[h % dim] += sign
    norm = np.sqrt(np.dot(values, values))
    if norm > 0.0:
        values /= norm
    return values


def pool_mean(vectors: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Componentwise arithmetic mean of equal-dim vectors.

    Rows are summed in lexicographic order of their contents, so the result
    is bitwise invariant under any permutation of the input. No
    re-normalization (cosine ranking is scale-invariant).
    """
    try:
        arr = np.asarray(vectors, dtype=np.float64)
    except ValueError as exc:
        raise DimensionError(f"pool_mean: mismatched vector dims: {exc}") from exc
    if arr.ndim == 1 and arr.size == 0 or arr.ndim == 2 and arr.shape[0] == 0:
        raise ValueError("pool_mean needs at least one vector")
    if arr.ndim != 2:
        raise DimensionError("pool_mean inputs must share one dimension")
    order = np.lexsort(arr.T[::-1])
    return arr[order].sum(axis=0) / arr.shape[0]


@dataclass
class EmbedderConfig:
    """Configuration for either provider kind."""

    kind: str = "hash"  # hash | remote
    dim: int = 64  # hash only; remote reads /info
    seed_tag: str = "grag"  # hash only
    endpoint: str | None = None  # remote only
    batch_size: int = 100
    max_in_flight: int = 4
    timeout: float = 10.0
    retries: int = 2

    def __post_init__(self):
        if self.kind not in ("hash", "remote"):
            raise ValueError(f"unknown embedder kind {self.kind!r}")
        if self.kind == "hash" and self.dim < 8:
            raise ValueError(f"hash embedder dim must be >= 8, got {self.dim}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote embedder needs an endpoint")


class _CachingEmbedder:
    """Shared (identity, text) -> vector cache; serialized writes."""

    def __init__(self):
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _embed_new(self, texts: list[str]) -> list[np.ndarray]:
        raise NotImplementedError

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]:
        """One vector per text, in order; cached texts are not re-embedded."""
        missing: list[str] = []
        seen: set[str] = set()
        for text in texts:
            if text not in self._cache and text not in seen:
                seen.add(text)
                missing.append(text)
        if missing:
            fresh = self._embed_new(missing)
            with self._lock:
                for text, vec in zip(missing, fresh):
                    self._cache[text] = vec
        return [self._cache[t] for t in texts]

    def embed_text(self, text: str) -> np.ndarray:
        return self.embed_texts([text])[0]

    def cache_size(self) -> int:
        return len(self._cache)


class HashEmbedder(_CachingEmbedder):
    """Local deterministic provider; a PLM stand-in for offline runs."""

    def __init__(self, dim: int = 64, seed_tag: str = "grag"):
        super().__init__()
        if dim < 8:
            raise ValueError(f"hash embedder dim must be >= 8, got {dim}")
        self._dim = dim
        self._seed_tag = seed_tag

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def identity(self) -> str:
        return f"hash:{self._dim}:{self._seed_tag}"

    def _embed_new(self, texts: list[str]) -> list[np.ndarray]:
        return [hash_embed(t, self._dim, self._seed_tag) for t in texts]


class RemoteEmbedder(_CachingEmbedder):
    """Client for the remote embedding protocol.

    ``POST {endpoint}/embed`` with ``{"texts": [...]}`` returns
    ``{"embeddings": [[...], ...]}``; ``GET {endpoint}/info`` reports
    ``{"dim": d, "model": name}``. Requests are batched at
    ``cfg.batch_size`` with at most ``cfg.max_in_flight`` in flight;
    responses are reassembled in input order.
    """

    def __init__(self, cfg: EmbedderConfig):
        super().__init__()
        if cfg.kind != "remote":
            raise ValueError("RemoteEmbedder needs a remote EmbedderConfig")
        self._cfg = cfg
        self._endpoint = cfg.endpoint.rstrip("/")
        self._info: dict | None = None

    def _fetch_info(self) -> dict:
        if self._info is None:
            payload = self._request("GET", f"{self._endpoint}/info")
            if not isinstance(payload, dict) or "dim" not in payload:
                raise ProtocolError(f"{self._endpoint}/info: malformed response")
            self._info = payload
        return self._info

    @property
    def dim(self) -> int:
        return int(self._fetch_info()["dim"])

    @property
    def model(self) -> str:
        return str(self._fetch_info().get("model", "unknown"))

    @property
    def identity(self) -> str:
        return f"remote:{self.model}:{self.dim}"

    def _request(self, method: str, url: str, body: dict | None = None) -> dict:
        last_error: Exception | None = None
        for _attempt in range(self._cfg.retries + 1):
            try:
                resp = requests.request(method, url, json=body, timeout=self._cfg.timeout)
                if resp.status_code != 200:
                    last_error = TransportError(f"{url}: HTTP {resp.status_code}")
                    continue
                return resp.json()
            except requests.RequestException as exc:
                last_error = exc
            except ValueError as exc:  # response body was not JSON
                raise ProtocolError(f"{url}: response is not JSON: {exc}") from exc
        raise TransportError(
            f"{url}: failed after {self._cfg.retries + 1} attempts: {last_error}"
        )

    def _embed_batch(self, batch: list[str]) -> list[np.ndarray]:
        payload = self._request("POST", f"{self._endpoint}/embed", {"texts": batch})
        if not isinstance(payload, dict) or "embeddings" not in payload:
            raise ProtocolError(f"{self._endpoint}/embed: missing 'embeddings'")
        embeddings = payload["embeddings"]
        if len(embeddings) != len(batch):
            raise ProtocolError(
                f"{self._endpoint}/embed: sent {len(batch)} texts, got "
                f"{len(embeddings)} vectors"
            )
        dim = self.dim
        out = []
        for vec in embeddings:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != dim:
                raise ProtocolError(
                    f"{self._endpoint}/embed: vector dim {arr.shape} != advertised {dim}"
                )
            if not np.all(np.isfinite(arr)):
                raise ProtocolError(f"{self._endpoint}/embed: non-finite vector entries")
            out.append(arr)
        return out

    def _embed_new(self, texts: list[str]) -> list[np.ndarray]:
        size = self._cfg.batch_size
        batches = [texts[i : i + size] for i in range(0, len(texts), size)]
        if len(batches) == 1:
            return self._embed_batch(batches[0])
        results: list[list[np.ndarray] | None] = [None] * len(batches)
        with ThreadPoolExecutor(max_workers=self._cfg.max_in_flight) as pool:
            futures = {pool.submit(self._embed_batch, b): i for i, b in enumerate(batches)}
            for future, i in futures.items():
                results[i] = future.result()
        out: list[np.ndarray] = []
        for chunk in results:
            out.extend(chunk)  # type: ignore[arg-type]
        return out


def make_embedder(cfg: EmbedderConfig) -> HashEmbedder | RemoteEmbedder:
    if cfg.kind == "hash":
        return HashEmbedder(dim=cfg.dim, seed_tag=cfg.seed_tag)
    return RemoteEmbedder(cfg)
