"""Command-line entry point: one subcommand per pipeline stage plus serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .pipeline import (
    REPORT_FILE,
    ConfigError,
    Pipeline,
    StageError,
    load_config,
)

STAGE_COMMANDS = ("ingest", "features", "filter", "topics", "spread", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adtriage",
        description="Semi-supervised triage pipeline for classified-ad corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="TOML or JSON pipeline config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")

    for name, help_text in (
        ("ingest", "parse and normalize the raw corpus"),
        ("features", "fit the n-gram model and extract the 15 signal bits"),
        ("filter", "drop all-zero listings and draw the review sample"),
        ("topics", "fit the topic model over filtered listings"),
        ("spread", "propagate expert labels over the topic vectors"),
        ("report", "render dataset, agreement, and result summaries"),
        ("run", "run every stage in order"),
    ):
        add_common(sub.add_parser(name, help=help_text))

    serve_parser = sub.add_parser("serve", help="start the HTTP review service")
    add_common(serve_parser)
    serve_parser.add_argument("--port", type=int, default=8000)
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--static", default=None, help="directory with the console bundle")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "serve":
            from .service import serve

            serve(cfg, port=args.port, host=args.host, static_dir=args.static)
            return 0
        runner = Pipeline(cfg)
        if args.command == "run":
            manifest = runner.run_all()
            for stage, entry in manifest.stages.items():
                flag = " (cached)" if entry.get("cached") else ""
                print(f"{stage}: {entry['seconds']:.2f}s{flag}")
        else:
            getattr(runner, args.command)()
            entry = runner.manifest.stages.get(args.command, {})
            flag = " (cached)" if entry.get("cached") else ""
            print(f"{args.command}: done{flag}")
        if args.command in ("report", "run"):
            print((Path(cfg.out_dir) / REPORT_FILE).read_text(encoding="utf-8"))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
