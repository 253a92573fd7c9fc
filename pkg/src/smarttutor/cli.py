"""Command-line entry point: load config, build the app, serve it."""

from __future__ import annotations

import argparse
import sys

from .config import ProviderSettings, ServiceConfig, load_config
from .errors import ConfigError


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="smarttutor")
    parser.add_argument("--config", help="path to YAML config file")
    parser.add_argument("--corpus", help="override corpus path")
    parser.add_argument("--listen", help="override listen address host:port")
    parser.add_argument("--log-store", help="override log store path")
    parser.add_argument(
        "--scripted-provider",
        metavar="TRANSCRIPT",
        help="run with the scripted provider replaying TRANSCRIPT (test mode)",
    )
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> ServiceConfig:
    config = load_config(args.config) if args.config else ServiceConfig()
    if args.corpus:
        config.corpus_path = args.corpus
    if args.listen:
        config.listen = args.listen
    if args.log_store:
        config.log_store_path = args.log_store
    if args.scripted_provider:
        config.provider = ProviderSettings(
            kind="scripted", script_path=args.scripted_provider
        )
    config.validate()
    return config


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc.message}", file=sys.stderr)
        return 2

    import uvicorn

    from .service import create_app

    host, _, port = config.listen.partition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))
    return 0


if __name__ == "__main__":
    sys.exit(main())
