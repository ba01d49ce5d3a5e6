"""Run the sidecar: ``python -m embed_sidecar [--model st:all-MiniLM-L6-v2]``.

Port comes from --port, else $GRAG_SIDECAR_PORT, else 8750. Uvicorn
installs SIGTERM/SIGINT handlers, so shutdown is graceful.
"""

from __future__ import annotations

import argparse

import uvicorn

from .server import ServerConfig, create_app


def main() -> None:
    parser = argparse.ArgumentParser(prog="embed_sidecar", description=__doc__)
    parser.add_argument("--model", default="dev",
                        help="'dev' (built-in, deterministic) or 'st:<model-name>'")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=None)
    parser.add_argument("--max-batch", type=int, default=256)
    parser.add_argument("--device", default=None, help="device hint for real models")
    parser.add_argument("--dev-dim", type=int, default=32)
    args = parser.parse_args()

    cfg = ServerConfig(
        model_name=args.model,
        max_batch=args.max_batch,
        device=args.device,
        dev_dim=args.dev_dim,
        **({"port": args.port} if args.port is not None else {}),
    )
    uvicorn.run(create_app(cfg), host=args.host, port=cfg.port)


if __name__ == "__main__":
    main()
