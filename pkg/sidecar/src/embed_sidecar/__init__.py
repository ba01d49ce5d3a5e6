"""HTTP sidecar exposing a sentence-embedding model.

Speaks the remote-embed protocol: ``GET /info``, ``POST /embed``,
``GET /health``. Backends: a pretrained SentenceTransformer
(``st:<model-name>``) when weights are available, or the built-in
deterministic ``dev`` encoder for offline and CI use.
"""

from .encoders import DevEncoder, load_encoder
from .server import ServerConfig, create_app

__all__ = ["DevEncoder", "load_encoder", "ServerConfig", "create_app"]
__version__ = "0.1.0"
