"""CLI for the adapters: extract embeddings, translate contexts."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .extractor import ExtractorConfig, extract_embeddings
from .translate import CassetteBackend, DeepTranslatorBackend, translate_contexts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambigeo-adapters",
        description="Produce EMBV1 embeddings and auto sense labels for ambigeo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="windows JSONL -> per-word EMBV1 files")
    p.add_argument("--windows", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--model", default="bert-large-uncased")
    p.add_argument("--pooling", choices=("mean", "first"), default="mean")
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("translate", help="windows JSONL -> per-word label JSONL")
    p.add_argument("--windows", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--language", default="it")
    p.add_argument("--stub", type=Path, default=None, help="offline cassette JSON")
    p.add_argument(
        "--lexicon",
        type=Path,
        default=None,
        help="JSON {target: [candidate translations]} for online alignment",
    )
    p.set_defaults(func=cmd_translate)
    return parser


def cmd_extract(args) -> int:
    config = ExtractorConfig(
        model=args.model,
        pooling=args.pooling,
        batch_size=args.batch_size,
        device=args.device,
    )
    report = extract_embeddings(args.windows, args.out_dir, config)
    for word, path in sorted(report.files.items()):
        print(f"{word}: {report.rows[word]} rows -> {path}")
    if report.skipped:
        print(f"skipped {len(report.skipped)} windows", file=sys.stderr)
    return 0


def cmd_translate(args) -> int:
    if args.stub is not None:
        backend = CassetteBackend(args.stub)
        lexicon = None
    else:
        backend = DeepTranslatorBackend()
        if args.lexicon is None:
            print("--lexicon is required for online translation", file=sys.stderr)
            return 2
        with open(args.lexicon, "r", encoding="utf-8") as source:
            lexicon = {word: set(cands) for word, cands in json.load(source).items()}
    report = translate_contexts(
        args.windows, args.out_dir, args.language, backend, lexicon
    )
    for word, path in sorted(report.files.items()):
        print(f"{word}: labels -> {path}")
    if not report.files:
        print("no labels produced", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, RuntimeError, ValueError, KeyError) as exc:
        print(f"ambigeo-adapters: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
