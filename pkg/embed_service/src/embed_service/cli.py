"""Command-line launcher for the embedding service."""

from __future__ import annotations

import argparse

from .app import ServiceConfig, create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-service", description=__doc__)
    parser.add_argument(
        "--model",
        default=ServiceConfig.model,
        help="Hugging Face model name, or hash:<dim>[:<seed>] for the offline encoder",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=ServiceConfig.port)
    parser.add_argument("--max-batch", type=int, default=ServiceConfig.max_batch)
    parser.add_argument("--device", default=ServiceConfig.device)
    return parser


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    args = build_parser().parse_args(argv)
    config = ServiceConfig(
        model=args.model, port=args.port, max_batch=args.max_batch, device=args.device
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port, log_level="warning")
    return 0


def entrypoint() -> None:
    raise SystemExit(main())
