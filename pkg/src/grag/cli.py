"""Command-line surface.

Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric error. An optional JSON
config file mirrors the flags (keys use underscores); explicit flags win.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .embedding import EmbedderConfig, make_embedder
from .errors import DocumentError, GragError, NumericError
from .graph import dataset_stats, ego_graph, load_graph
from .index import build_index, load_index, persist_index
from .metrics import METRICS, compute_metric, load_eval_files
from .pipeline import PipelineWeights, run_query
from .textualize import describe_subgraph, parse_description, parse_retrieval
from .weights import (
    DEFAULT_WEIGHT_SEED,
    SEED_OFFSETS,
    default_gnn,
    default_projection,
    default_scale_head,
    load_gnn_weights,
    load_mlp_weights,
)

EXIT_DATA = 3
EXIT_NUMERIC = 4


def _handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except NumericError as exc:
            click.echo(f"numeric error: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except GragError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except ValueError as exc:  # bad parameter values (k < 1, dim < 8, ...)
            raise click.UsageError(str(exc)) from exc

    return wrapper


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DocumentError(f"config {path} must hold a JSON object")
    return cfg


def _pick(flag, config: dict, key: str, default=None):
    """Explicit flag > config value > default."""
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _make_embedder_from_opts(config, embedder, endpoint, dim, seed_tag, default_dim=64):
    kind = _pick(embedder, config, "embedder", "hash")
    cfg = EmbedderConfig(
        kind=kind,
        dim=int(_pick(dim, config, "dim", default_dim)),
        seed_tag=_pick(seed_tag, config, "seed_tag", "grag"),
        endpoint=_pick(endpoint, config, "endpoint"),
        batch_size=int(config.get("batch_size", 100)),
        max_in_flight=int(config.get("max_in_flight", 4)),
        timeout=float(config.get("timeout", 10.0)),
        retries=int(config.get("retries", 2)),
    )
    return make_embedder(cfg)


_embedder_options = [
    click.option("--embedder", type=click.Choice(["hash", "remote"]), default=None,
                 help="Embedding provider (default hash)."),
    click.option("--endpoint", default=None, help="Remote embedder base URL."),
    click.option("--dim", type=int, default=None, help="Hash embedder dimension."),
    click.option("--seed-tag", default=None, help="Hash embedder seed tag."),
]


def _with_options(options):
    def wrap(f):
        for option in reversed(options):
            f = option(f)
        return f

    return wrap


@click.group()
def main():
    """Graph retrieval-augmented generation engine."""


@main.command("index")
@click.option("--graph", "graph_path", required=True, help="Graph document (JSON or CSV dir).")
@click.option("--k", type=int, default=None, help="Ego-graph hop count (default 2).")
@_with_options(_embedder_options)
@click.option("--workers", type=int, default=None, help="Parallel embedding workers.")
@click.option("--out", "out_path", required=True, help="Index file to write.")
@click.option("--config", "config_path", default=None, help="JSON config mirroring flags.")
@_handle_errors
def index_cmd(graph_path, k, embedder, endpoint, dim, seed_tag, workers, out_path, config_path):
    """Build the K-hop ego-graph embedding index."""
    config = _load_config(config_path)
    g = load_graph(_pick(graph_path, config, "graph"))
    emb = _make_embedder_from_opts(config, embedder, endpoint, dim, seed_tag)
    idx = build_index(
        g,
        int(_pick(k, config, "k", 2)),
        emb,
        workers=int(_pick(workers, config, "workers", 1)),
    )
    persist_index(idx, out_path)
    click.echo(f"indexed {len(idx.entries)} ego-graphs (k={idx.k}, dim={idx.dim}) -> {out_path}")


def _load_pipeline_weights(config, phi1, phi2, gnn, phi3, emb_dim, d_llm):
    """Load weight files where given; otherwise seeded defaults."""
    seed = int(config.get("weight_seed", DEFAULT_WEIGHT_SEED))
    phi1_w = (
        load_mlp_weights(phi1) if phi1 else default_scale_head(emb_dim, seed + SEED_OFFSETS["phi1"])
    )
    phi2_w = (
        load_mlp_weights(phi2) if phi2 else default_scale_head(emb_dim, seed + SEED_OFFSETS["phi2"])
    )
    gnn_w = load_gnn_weights(gnn) if gnn else default_gnn(emb_dim, emb_dim, seed + SEED_OFFSETS["gnn"])
    phi3_w = (
        load_mlp_weights(phi3)
        if phi3
        else default_projection(gnn_w.output_dim, d_llm, seed + SEED_OFFSETS["phi3"])
    )
    return PipelineWeights(phi1=phi1_w, phi2=phi2_w, gnn=gnn_w, phi3=phi3_w)


@main.command("query")
@click.option("--graph", "graph_path", required=True)
@click.option("--index", "index_path", required=True)
@click.option("--question", required=True)
@click.option("--top-n", type=int, default=None, help="Ego-graphs to retrieve (default 3).")
@click.option("--phi1", default=None, help="Node scale-head weight file.")
@click.option("--phi2", default=None, help="Edge scale-head weight file.")
@click.option("--gnn", default=None, help="Graph encoder weight file.")
@click.option("--phi3", default=None, help="Token projection weight file.")
@click.option("--d-llm", type=int, default=None, help="Graph token dimension (default 128).")
@click.option("--prune-eps", type=float, default=None,
              help="Hard-drop alpha<eps entities from descriptions (default off).")
@_with_options(_embedder_options)
@click.option("--out", "out_path", required=True, help="Bundle file to write.")
@click.option("--config", "config_path", default=None)
@_handle_errors
def query_cmd(graph_path, index_path, question, top_n, phi1, phi2, gnn, phi3, d_llm,
              prune_eps, embedder, endpoint, dim, seed_tag, out_path, config_path):
    """Retrieve, prune, and emit the dual-view prompt bundle."""
    config = _load_config(config_path)
    g = load_graph(_pick(graph_path, config, "graph"))
    idx = load_index(_pick(index_path, config, "index"), graph=g)
    emb = _make_embedder_from_opts(
        config, embedder, endpoint, dim, seed_tag, default_dim=idx.dim
    )
    weights = _load_pipeline_weights(
        config,
        _pick(phi1, config, "phi1"),
        _pick(phi2, config, "phi2"),
        _pick(gnn, config, "gnn"),
        _pick(phi3, config, "phi3"),
        emb_dim=idx.dim,
        d_llm=int(_pick(d_llm, config, "d_llm", 128)),
    )
    bundle = run_query(
        g,
        idx,
        question,
        int(_pick(top_n, config, "top_n", 3)),
        weights,
        emb,
        prune_eps=_pick(prune_eps, config, "prune_eps"),
    )
    bundle.save(out_path)


@main.command("describe")
@click.option("--graph", "graph_path", required=True)
@click.option("--center", type=int, required=True)
@click.option("--k", type=int, default=None, help="Hop count (default 2).")
@click.option("--config", "config_path", default=None)
@_handle_errors
def describe_cmd(graph_path, center, k, config_path):
    """Print the hierarchical description of one ego-graph."""
    config = _load_config(config_path)
    g = load_graph(_pick(graph_path, config, "graph"))
    sub = ego_graph(g, center, int(_pick(k, config, "k", 2)))
    click.echo(describe_subgraph(sub, g).text)


@main.command("parse")
@click.option("--description", "description_path", required=True)
@click.option("--out", "out_path", required=True, help="Graph document JSON to write.")
@click.option("--config", "config_path", default=None)
@_handle_errors
def parse_cmd(description_path, out_path, config_path):
    """Parse a description back into a graph document (inverse of describe)."""
    text = Path(description_path).read_text(encoding="utf-8")
    if text.startswith("SUBGRAPH "):
        sections = parse_retrieval(text)
        doc = {
            "subgraphs": [
                {
                    "rank": header.rank,
                    "center": header.center,
                    "score": header.score,
                    "graph": graph.to_document(),
                }
                for header, graph in sections
            ]
        }
    else:
        doc = parse_description(text).to_document()
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    click.echo(f"parsed {description_path} -> {out_path}")


@main.command("eval")
@click.option("--pred", "pred_path", required=True, help="Predictions JSONL.")
@click.option("--gold", "gold_path", required=True, help="Gold answers JSONL.")
@click.option("--metric", type=click.Choice(METRICS), required=True)
@_handle_errors
def eval_cmd(pred_path, gold_path, metric):
    """Score predictions against gold answers."""
    records = load_eval_files(pred_path, gold_path)
    score = compute_metric(records, metric)
    click.echo(json.dumps({"metric": metric, "score": score, "records": len(records)}))


@main.command("stats")
@click.option("--dataset", "dataset_dir", required=True, help="Dataset directory.")
@_handle_errors
def stats_cmd(dataset_dir):
    """Per-graph mean node/edge counts for a dataset directory."""
    click.echo(json.dumps(dataset_stats(dataset_dir)))


if __name__ == "__main__":
    main()
