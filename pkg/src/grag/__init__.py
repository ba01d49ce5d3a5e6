"""Graph retrieval-augmented generation engine.

Retrieves query-relevant textual subgraphs from text-attributed graphs via
K-hop ego-graph indexing, exact cosine ranking, and soft pruning, then
emits dual-view prompt bundles: a lossless hierarchical text description
plus a relevance-scaled graph-encoder token.
"""

from .embedding import (
    EmbedderConfig,
    HashEmbedder,
    RemoteEmbedder,
    hash_embed,
    make_embedder,
    pool_mean,
)
from .encoder import GraphToken, gnn_forward, project_token, readout
from .errors import (
    DataError,
    DescriptionParseError,
    DimensionError,
    DisconnectedError,
    DocumentError,
    FingerprintError,
    GragError,
    IndexFormatError,
    IndexVersionError,
    NotFoundError,
    NumericError,
    ProtocolError,
    ReferentialError,
    TransportError,
    WeightFormatError,
)
from .graph import (
    EdgeRecord,
    Subgraph,
    TextGraph,
    dataset_stats,
    ego_graph,
    iter_dataset_graphs,
    k_hop_neighborhood,
    load_graph,
    load_graph_csv,
    load_graph_json,
    union_subgraphs,
)
from .index import (
    EgoIndex,
    EgoIndexEntry,
    RankedSubgraph,
    build_index,
    cosine,
    load_index,
    persist_index,
    rank_top_n,
)
from .metrics import EvalRecord, compute_metric, load_eval_files, normalize_answer
from .pipeline import PipelineWeights, PromptBundle, run_query
from .pruning import (
    PrunedSubgraph,
    RelevanceScales,
    elementwise_distance,
    merge_pruned,
    relevance_scales,
)
from .textualize import (
    HierDescription,
    ResidualEdges,
    TreeView,
    describe_retrieval,
    describe_subgraph,
    parse_description,
    parse_retrieval,
    render_description,
    split_bfs,
)
from .weights import (
    GnnWeights,
    MlpWeights,
    default_gnn,
    default_pipeline_weights,
    default_projection,
    default_scale_head,
    load_gnn_weights,
    load_mlp_weights,
    mlp_forward,
    save_gnn_weights,
    save_mlp_weights,
    weight_hash,
)

__version__ = "0.1.0"
