"""Feed-forward and graph-encoder weights: containers, file IO, defaults.

Weight files are plain JSON. MLPs::

    {"input_dim": d, "layers": [{"w": [[...]], "b": [...],
                                 "act": "relu|sigmoid|identity"}, ...]}

Graph encoders::

    {"node_dim": d, "edge_dim": d, "hidden": h,
     "layers": [{"heads": [{"w_self": ..., "w_nbr": ..., "w_edge": ...,
                            "a": ..., "slope": 0.2}, ...]}, ...]}

Training is out of scope; callers either load files or use the seeded
pseudorandom defaults below (base seed ``DEFAULT_WEIGHT_SEED``, one offset
per role), which make the whole pipeline runnable and deterministic
untrained.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import DimensionError, NumericError, WeightFormatError
from .serialize import dumps_canonical

ACTIVATIONS = ("relu", "sigmoid", "identity")

# Base seed for default (untrained) weights; per-role seeds below.
DEFAULT_WEIGHT_SEED = 1789
SEED_OFFSETS = {"phi1": 1, "phi2": 2, "phi3": 3, "gnn": 4}


@dataclass(frozen=True)
class MlpLayer:
    w: np.ndarray  # out x in
    b: np.ndarray  # out
    activation: str


@dataclass(frozen=True)
class MlpWeights:
    input_dim: int
    layers: tuple[MlpLayer, ...]

    def __post_init__(self):
        prev = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.activation not in ACTIVATIONS:
                raise WeightFormatError(f"layer {i}: unknown activation {layer.activation!r}")
            if layer.w.ndim != 2 or layer.b.ndim != 1:
                raise WeightFormatError(f"layer {i}: w must be 2-D and b 1-D")
            out_dim, in_dim = layer.w.shape
            if in_dim != prev:
                raise WeightFormatError(
                    f"layer {i}: input dim {in_dim} does not chain from {prev}"
                )
            if layer.b.shape[0] != out_dim:
                raise WeightFormatError(f"layer {i}: bias dim {layer.b.shape[0]} != {out_dim}")
            prev = out_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].w.shape[0] if self.layers else self.input_dim


def _apply_activation(name: str, x: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "sigmoid":
        return expit(x)
    return x


def mlp_forward(weights: MlpWeights, x: np.ndarray) -> np.ndarray:
    """Plain feed-forward pass: y_l = act_l(W_l y_{l-1} + b_l)."""
    y = np.asarray(x, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != weights.input_dim:
        raise DimensionError(
            f"mlp input dim {y.shape} does not match declared {weights.input_dim}"
        )
    for i, layer in enumerate(weights.layers):
        with np.errstate(over="ignore", invalid="ignore"):
            y = _apply_activation(layer.activation, layer.w @ y + layer.b)
        if not np.all(np.isfinite(y)):
            raise NumericError(f"non-finite value after mlp layer {i}")
    return y


@dataclass(frozen=True)
class GnnHead:
    w_self: np.ndarray  # h x in
    w_nbr: np.ndarray  # h x in
    w_edge: np.ndarray  # h x edge_dim
    a: np.ndarray  # 2h
    slope: float  # LeakyReLU negative slope


@dataclass(frozen=True)
class GnnLayer:
    heads: tuple[GnnHead, ...]


@dataclass(frozen=True)
class GnnWeights:
    """Attention message-passing weights.

    Heads concatenate between layers (layer output H*h) and average at the
    final layer (output h). Edge features enter every layer at edge_dim.
    """

    node_dim: int
    edge_dim: int
    hidden: int
    layers: tuple[GnnLayer, ...]

    def __post_init__(self):
        if not self.layers:
            raise WeightFormatError("graph encoder needs at least one layer")
        h = self.hidden
        in_dim = self.node_dim
        for li, layer in enumerate(self.layers):
            if not layer.heads:
                raise WeightFormatError(f"layer {li}: needs at least one head")
            for hi, head in enumerate(layer.heads):
                where = f"layer {li} head {hi}"
                if head.w_self.shape != (h, in_dim) or head.w_nbr.shape != (h, in_dim):
                    raise WeightFormatError(
                        f"{where}: w_self/w_nbr must be {h}x{in_dim}, "
                        f"got {head.w_self.shape} and {head.w_nbr.shape}"
                    )
                if head.w_edge.shape != (h, self.edge_dim):
                    raise WeightFormatError(
                        f"{where}: w_edge must be {h}x{self.edge_dim}, got {head.w_edge.shape}"
                    )
                if head.a.shape != (2 * h,):
                    raise WeightFormatError(
                        f"{where}: attention vector must have dim {2 * h}, got {head.a.shape}"
                    )
            in_dim = h * len(layer.heads)

    @property
    def output_dim(self) -> int:
        return self.hidden  # final layer averages heads


# --- file IO ---------------------------------------------------------------


def _as_matrix(obj, where: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise WeightFormatError(f"{where}: not numeric: {exc}") from exc
    if not np.all(np.isfinite(arr)):
        raise WeightFormatError(f"{where}: contains non-finite values")
    return arr


def _load_json(path: str | Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"{path}: invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise WeightFormatError(f"cannot read weight file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise WeightFormatError(f"{path}: weight file must hold a JSON object")
    return doc


def mlp_from_dict(doc: dict) -> MlpWeights:
    try:
        input_dim = int(doc["input_dim"])
        raw_layers = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightFormatError(f"weight object missing field: {exc}") from exc
    layers = []
    for i, raw in enumerate(raw_layers):
        try:
            w = _as_matrix(raw["w"], f"layer {i} w")
            b = _as_matrix(raw["b"], f"layer {i} b")
            act = str(raw["act"])
        except (KeyError, TypeError) as exc:
            raise WeightFormatError(f"layer {i}: missing field: {exc}") from exc
        layers.append(MlpLayer(w=w, b=b, activation=act))
    return MlpWeights(input_dim=input_dim, layers=tuple(layers))


def mlp_to_dict(weights: MlpWeights) -> dict:
    return {
        "input_dim": weights.input_dim,
        "layers": [
            {"w": layer.w, "b": layer.b, "act": layer.activation}
            for layer in weights.layers
        ],
    }


def load_mlp_weights(path: str | Path) -> MlpWeights:
    return mlp_from_dict(_load_json(path))


def save_mlp_weights(weights: MlpWeights, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(mlp_to_dict(weights)) + "\n", encoding="utf-8")


def gnn_from_dict(doc: dict) -> GnnWeights:
    try:
        node_dim = int(doc["node_dim"])
        edge_dim = int(doc["edge_dim"])
        hidden = int(doc["hidden"])
        raw_layers = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightFormatError(f"gnn weight object missing field: {exc}") from exc
    layers = []
    for li, raw_layer in enumerate(raw_layers):
        heads = []
        for hi, raw in enumerate(raw_layer.get("heads", [])):
            where = f"layer {li} head {hi}"
            try:
                heads.append(
                    GnnHead(
                        w_self=_as_matrix(raw["w_self"], f"{where} w_self"),
                        w_nbr=_as_matrix(raw["w_nbr"], f"{where} w_nbr"),
                        w_edge=_as_matrix(raw["w_edge"], f"{where} w_edge"),
                        a=_as_matrix(raw["a"], f"{where} a"),
                        slope=float(raw.get("slope", 0.2)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise WeightFormatError(f"{where}: missing field: {exc}") from exc
        layers.append(GnnLayer(heads=tuple(heads)))
    return GnnWeights(node_dim=node_dim, edge_dim=edge_dim, hidden=hidden, layers=tuple(layers))


def gnn_to_dict(weights: GnnWeights) -> dict:
    return {
        "node_dim": weights.node_dim,
        "edge_dim": weights.edge_dim,
        "hidden": weights.hidden,
        "layers": [
            {
                "heads": [
                    {
                        "w_self": head.w_self,
                        "w_nbr": head.w_nbr,
                        "w_edge": head.w_edge,
                        "a": head.a,
                        "slope": head.slope,
                    }
                    for head in layer.heads
                ]
            }
            for layer in weights.layers
        ],
    }


def load_gnn_weights(path: str | Path) -> GnnWeights:
    return gnn_from_dict(_load_json(path))


def save_gnn_weights(weights: GnnWeights, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(gnn_to_dict(weights)) + "\n", encoding="utf-8")


def weight_hash(weights: MlpWeights | GnnWeights) -> str:
    """Content hash over the canonical serialization (formatting-independent)."""
    doc = mlp_to_dict(weights) if isinstance(weights, MlpWeights) else gnn_to_dict(weights)
    return hashlib.sha256(dumps_canonical(doc).encode("utf-8")).hexdigest()


# --- seeded defaults --------------------------------------------------------


def _glorot(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    scale = np.sqrt(2.0 / (in_dim + out_dim))
    return rng.standard_normal((out_dim, in_dim)) * scale


def default_scale_head(dim: int, seed: int) -> MlpWeights:
    """Relevance-scale head: dim -> dim/2 (relu) -> 1 (sigmoid)."""
    rng = np.random.default_rng(seed)
    mid = max(dim // 2, 1)
    return MlpWeights(
        input_dim=dim,
        layers=(
            MlpLayer(w=_glorot(rng, mid, dim), b=np.zeros(mid), activation="relu"),
            MlpLayer(w=_glorot(rng, 1, mid), b=np.zeros(1), activation="sigmoid"),
        ),
    )


def default_projection(in_dim: int, out_dim: int, seed: int) -> MlpWeights:
    """Linear alignment layer from encoder space to the LLM token space."""
    rng = np.random.default_rng(seed)
    return MlpWeights(
        input_dim=in_dim,
        layers=(
            MlpLayer(w=_glorot(rng, out_dim, in_dim), b=np.zeros(out_dim), activation="identity"),
        ),
    )


def default_gnn(
    node_dim: int,
    edge_dim: int,
    seed: int,
    hidden: int = 64,
    layer_count: int = 2,
    heads: int = 2,
    slope: float = 0.2,
) -> GnnWeights:
    """Desk-scale encoder default: 2 layers x 2 heads, hidden 64.

    The reported 4x4x1024 shape is supported but pointless untrained.
    """
    rng = np.random.default_rng(seed)
    layers = []
    in_dim = node_dim
    for _li in range(layer_count):
        layer_heads = tuple(
            GnnHead(
                w_self=_glorot(rng, hidden, in_dim),
                w_nbr=_glorot(rng, hidden, in_dim),
                w_edge=_glorot(rng, hidden, edge_dim),
                a=rng.standard_normal(2 * hidden) / np.sqrt(2 * hidden),
                slope=slope,
            )
            for _hi in range(heads)
        )
        layers.append(GnnLayer(heads=layer_heads))
        in_dim = hidden * heads
    return GnnWeights(node_dim=node_dim, edge_dim=edge_dim, hidden=hidden, layers=tuple(layers))


def default_pipeline_weights(dim: int, d_llm: int, seed: int = DEFAULT_WEIGHT_SEED):
    """(phi1, phi2, gnn, phi3) defaults for embedding dim ``dim``."""
    phi1 = default_scale_head(dim, seed + SEED_OFFSETS["phi1"])
    phi2 = default_scale_head(dim, seed + SEED_OFFSETS["phi2"])
    gnn = default_gnn(dim, dim, seed + SEED_OFFSETS["gnn"])
    phi3 = default_projection(gnn.output_dim, d_llm, seed + SEED_OFFSETS["phi3"])
    return phi1, phi2, gnn, phi3
