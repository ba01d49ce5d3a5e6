"""Embedding backends.

``dev``: a dependency-free deterministic encoder (signed blake2b feature
hashing over word unigrams and character trigrams, L2-normalized). It has
no semantics beyond lexical overlap, but it is bit-stable across platforms
and needs no model download, which makes it the default for tests and
air-gapped machines.

``st:<name>``: any SentenceTransformer model, loaded lazily. Evaluation
mode, so repeated requests for the same text return identical vectors.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


class DevEncoder:
    """Deterministic hashed-feature sentence encoder."""

    name = "dev-hash-v1"

    def __init__(self, dim: int = 32):
        if dim < 8:
            raise ValueError(f"dim must be >= 8, got {dim}")
        self.dim = dim

    def _features(self, text: str) -> list[str]:
        lowered = text.lower()
        feats = [f"w:{tok}" for tok in _WORD_RE.findall(lowered)]
        padded = f"^{lowered}$"
        feats.extend(f"c:{padded[i : i + 3]}" for i in range(len(padded) - 2))
        return feats

    def encode(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            values = np.zeros(self.dim, dtype=np.float64)
            for feat in self._features(text):
                digest = hashlib.blake2b(feat.encode("utf-8"), digest_size=8).digest()
                h = int.from_bytes(digest, "big")
                sign = 1.0 if (h >> 61) & 1 == 0 else -1.0
                values[h % self.dim] += sign
            norm = float(np.sqrt(np.dot(values, values)))
            if norm > 0.0:
                values /= norm
            out.append(values.tolist())
        return out


class SentenceTransformerEncoder:
    """Wraps a pretrained SentenceTransformer model."""

    def __init__(self, model_name: str, device: str | None = None):
        from sentence_transformers import SentenceTransformer

        self.name = model_name
        self._model = SentenceTransformer(model_name, device=device)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> list[list[float]]:
        vectors = self._model.encode(
            texts, convert_to_numpy=True, show_progress_bar=False
        )
        return np.asarray(vectors, dtype=np.float64).tolist()


def load_encoder(model_name: str, dim: int = 32, device: str | None = None):
    """``dev`` selects the built-in encoder, ``st:<name>`` a real model."""
    if model_name == "dev":
        return DevEncoder(dim=dim)
    if model_name.startswith("st:"):
        return SentenceTransformerEncoder(model_name[3:], device=device)
    raise ValueError(f"unknown model {model_name!r}; use 'dev' or 'st:<model-name>'")
