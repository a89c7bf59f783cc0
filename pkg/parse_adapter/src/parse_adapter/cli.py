"""Standalone entry point: corpus in, CoNLL-U out."""

from __future__ import annotations

import argparse
import sys

from .adapter import AdapterConfig, parse_corpus
from .backends import available_backends, get_backend, BackendUnavailable


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parse-adapter",
        description="Parse a pre-tokenized corpus into CoNLL-U with "
                    "propagated-subject enhanced arcs.")
    parser.add_argument("--input", required=True,
                        help="corpus file; text after a TAB is ignored")
    parser.add_argument("--output", required=True, help="CoNLL-U output path")
    parser.add_argument("--backend", default="auto",
                        help="auto, spacy, or pattern (available: %s)"
                             % ", ".join(available_backends()))
    parser.add_argument("--spacy-model", default="en_core_web_sm")
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--warnings", help="write warning records here")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        kwargs = {"model": args.spacy_model} if args.backend == "spacy" else {}
        backend = get_backend(args.backend, **kwargs)
    except (BackendUnavailable, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = AdapterConfig(input_path=args.input, output_path=args.output,
                           backend=args.backend, batch_size=args.batch_size,
                           warnings_path=args.warnings)
    try:
        warnings = parse_corpus(config, backend=backend)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 2
    for w in warnings:
        print(f"warning: sentence {w.sentence_id}: {w.message}", file=sys.stderr)
    print(f"wrote {args.output} with backend {backend.name} "
          f"({len(warnings)} warnings)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
