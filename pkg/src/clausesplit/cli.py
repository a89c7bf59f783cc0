"""Command-line entry point.

Subcommands: make-labels, train, decompose, evaluate, oracle-roundtrip,
stats.  Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import model as _model
from .corpus import (DEFAULT_SEPARATOR, attach_parses, build_vocab,
                     read_parallel_corpus, read_conllu)
from .errors import DataError, NumericalError
from .graph import build_graph, dump_triples, relation_vocab
from .metrics import corpus_report, write_example_records
from .segmenter import decompose, segment, write_decompositions, write_provenance
from .supervision import (LABELS, align_tokens, create_labels,
                          is_reconstructible, read_label_cache,
                          write_label_cache)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def read_config_file(path):
    """Optional `key = value` config; comment lines start with #."""
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_data_flags(p, need_gold=True):
    p.add_argument("--corpus", required=True, help="parallel corpus file")
    p.add_argument("--parses", required=True, help="CoNLL-U parse file")
    p.add_argument("--separator", default=DEFAULT_SEPARATOR)


def _add_model_flags(p):
    p.add_argument("--config", help="optional key = value config file "
                                    "(command-line flags win)")
    p.add_argument("--classifier", choices=["mlp", "bilinear"], default="mlp")
    p.add_argument("--positional-encoding", choices=["on", "off"], default="on")
    p.add_argument("--class-weights", choices=["inverse", "uniform"],
                   default="inverse")
    p.add_argument("--literal-c", action="store_true",
                   help="use the looser published wording for Copy labels")
    p.add_argument("--embedding-dim", type=int, default=100)
    p.add_argument("--hidden-size", type=int, default=800)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--mlp-hidden", type=int, default=None)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--lr-decay", type=float, default=0.99)
    p.add_argument("--l2-decay", type=float, default=None,
                   help="read the decay as per-epoch weight shrink instead "
                        "of learning-rate decay")
    p.add_argument("--dev-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = _Parser(prog="clausesplit",
                     description="Rewrite complex sentences as one simple "
                                 "sentence per tensed clause.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-labels", parents=[], help="write distant-supervision labels")
    _add_data_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--literal-c", action="store_true")
    p.add_argument("--graph-dump", help="also dump triples, one file for all graphs")

    p = sub.add_parser("train", help="train the edit classifier")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--vectors", help="pretrained word-vector text file")
    p.add_argument("--label-cache", help="reuse labels from make-labels output")
    p.add_argument("--checkpoint-out", required=True)
    p.add_argument("--log")
    parser.train_parser = p

    p = sub.add_parser("decompose", help="split sentences with a trained model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True,
                   help="corpus file; targets after the TAB are ignored, "
                        "lines without a TAB are treated as bare sources")
    p.add_argument("--parses", required=True)
    p.add_argument("--separator", default=DEFAULT_SEPARATOR)
    p.add_argument("--out", required=True)
    p.add_argument("--provenance")

    p = sub.add_parser("evaluate", help="score predictions against gold outputs")
    _add_data_flags(p)
    p.add_argument("--checkpoint", help="model to run; or use --predictions")
    p.add_argument("--predictions", help="pre-computed decompose output file")
    p.add_argument("--per-example", help="write per-example records here")
    p.add_argument("--assignment", choices=["greedy", "optimal"], default="greedy")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("oracle-roundtrip",
                       help="run gold labels through the segmenter and report "
                            "the exact-match rate on reconstructible examples")
    _add_data_flags(p)
    p.add_argument("--literal-c", action="store_true")

    p = sub.add_parser("stats", help="label distribution and derived class weights")
    _add_data_flags(p)
    p.add_argument("--literal-c", action="store_true")

    return parser


def _load_joined(args):
    examples = read_parallel_corpus(args.corpus, separator=args.separator)
    parses = read_conllu(args.parses)
    joined, excluded = attach_parses(examples, parses)
    for record in excluded:
        print(f"excluded {record.example_id}: {record.reason}", file=sys.stderr)
    if not joined:
        raise DataError("no examples with usable parses")
    return joined


def _labeled_graphs(joined, literal):
    mode = "literal" if literal else "default"
    out = []
    for ex in joined:
        graph = build_graph(ex.source, ex.parse)
        alignment = align_tokens(ex.source, ex.gold_outputs)
        out.append((ex, graph, alignment, create_labels(graph, alignment, mode=mode)))
    return out


def cmd_make_labels(args):
    joined = _load_joined(args)
    rows = _labeled_graphs(joined, args.literal_c)
    write_label_cache(args.out, ((ex.id, lg) for ex, _, _, lg in rows))
    if args.graph_dump:
        with open(args.graph_dump, "w", encoding="utf-8") as f:
            for ex, graph, _, _ in rows:
                f.write(f"# {ex.id}\n")
                f.write(dump_triples(graph))
    print(f"labeled {len(rows)} examples -> {args.out}")
    return EXIT_OK


def _apply_config_file(parser, argv):
    """Install `key = value` file entries as parser defaults, so flags
    given on the command line override them."""
    if "--config" not in argv:
        return
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return  # argparse reports the missing value
    file_values = read_config_file(argv[at + 1])
    actions = {a.dest: a for a in parser.train_parser._actions}
    overrides = {}
    for key, raw in file_values.items():
        action = actions.get(key)
        if action is None:
            raise DataError(f"unknown config key {key!r}")
        if isinstance(action.const, bool):  # store_true flags
            overrides[key] = raw.lower() in ("1", "true", "on", "yes")
        elif action.type is not None:
            overrides[key] = action.type(raw)
        else:
            overrides[key] = raw
    parser.train_parser.set_defaults(**overrides)


def cmd_train(args):
    joined = _load_joined(args)
    mode = "literal" if args.literal_c else "default"
    cache = read_label_cache(args.label_cache) if args.label_cache else None
    items = []
    graphs = []
    for ex in joined:
        graph = build_graph(ex.source, ex.parse)
        graphs.append(graph)
        if cache is not None:
            by_pair = cache.get(ex.id)
            if by_pair is None:
                raise DataError(f"label cache has no entry for example {ex.id}")
            labels = tuple(by_pair[(t.src, t.tgt)] for t in graph.triples)
        else:
            alignment = align_tokens(ex.source, ex.gold_outputs)
            labels = create_labels(graph, alignment, mode=mode).labels
        items.append(_model.TrainingItem(
            tokens=tuple(t.surface for t in ex.source), graph=graph,
            labels=tuple(LABELS.index(lab) for lab in labels)))

    vocab = build_vocab(joined, embedding_file=args.vectors, dim=args.embedding_dim)
    relations = relation_vocab(graphs)
    freqs = _model.label_frequencies(items)
    weights = _model.resolve_class_weights(
        _model.LossConfig(mode=args.class_weights), freqs)

    config = _model.ModelConfig(
        embedding_dim=vocab.dim, hidden_size=args.hidden_size,
        dropout=args.dropout,
        positional_encoding=args.positional_encoding == "on",
        heads=args.heads, mlp_hidden=args.mlp_hidden,
        classifier=args.classifier)
    train_config = _model.TrainConfig(
        learning_rate=args.lr, batch_size=args.batch_size,
        max_epochs=args.epochs, patience=args.patience,
        lr_decay=args.lr_decay, l2_decay=args.l2_decay,
        dev_fraction=args.dev_fraction, seed=args.seed)
    state = _model.init_state(config, vocab, relations, class_weights=weights,
                              seed=args.seed)
    state, logs = _model.train(items, state, train_config,
                               checkpoint_path=args.checkpoint_out,
                               log_path=args.log)
    last = logs[-1]
    print(f"trained {last.epoch} epochs, final train loss {last.train_loss:.4f} "
          f"-> {args.checkpoint_out}")
    return EXIT_OK


def _read_sources(path, separator):
    """Corpus lines for inference; the target side is optional."""
    from .corpus import Example, tokens_from_words

    examples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            src_part = line.split("\t", 1)[0]
            words = src_part.split()
            if not words:
                raise DataError(f"{path}:{lineno}: empty source")
            examples.append(Example(id=str(lineno), source=tokens_from_words(words)))
    return examples


def cmd_decompose(args):
    state = _model.ModelState.load(args.checkpoint)
    examples = _read_sources(args.corpus, args.separator)
    parses = read_conllu(args.parses)
    joined, excluded = attach_parses(examples, parses)
    for record in excluded:
        print(f"excluded {record.example_id}: {record.reason}", file=sys.stderr)
    if not joined:
        raise DataError("no examples with usable parses")
    results = [decompose(ex.source, ex.parse, state) for ex in joined]
    write_decompositions(results, args.out, args.separator)
    if args.provenance:
        write_provenance(results, args.provenance)
    print(f"decomposed {len(results)} sentences -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args):
    joined = _load_joined(args)
    if bool(args.checkpoint) == bool(args.predictions):
        raise DataError("pass exactly one of --checkpoint or --predictions")
    if args.checkpoint:
        state = _model.ModelState.load(args.checkpoint)
        predictions = [decompose(ex.source, ex.parse, state).token_lists
                       for ex in joined]
    else:
        predictions = []
        with open(args.predictions, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                predictions.append([s.split() for s in line.split(args.separator)]
                                   if line else [])
        if len(predictions) != len(joined):
            raise DataError(f"{len(predictions)} prediction lines for "
                            f"{len(joined)} examples")
    report = corpus_report(joined, predictions, assignment=args.assignment,
                           workers=args.workers)
    print(str(report))
    if args.per_example:
        write_example_records(report, args.per_example)
    return EXIT_OK


def cmd_oracle_roundtrip(args):
    joined = _load_joined(args)
    rows = _labeled_graphs(joined, args.literal_c)
    total = 0
    exact = 0
    for ex, graph, alignment, lg in rows:
        if not is_reconstructible(alignment):
            continue
        total += 1
        rendered = segment(lg).token_lists
        gold = [list(s) for s in ex.gold_outputs]
        if _matches(rendered, gold):
            exact += 1
    if total == 0:
        raise DataError("no reconstructible examples")
    rate = 100.0 * exact / total
    print(f"reconstructible: {total}  exact: {exact}  rate: {rate:.2f}%")
    return EXIT_OK


def _normalize(sentence):
    toks = [t.lower() for t in sentence]
    if toks and toks[-1] not in (".", "!", "?"):
        toks.append(".")
    return toks


def _matches(rendered, gold):
    if len(rendered) != len(gold):
        return False
    return all(_normalize(r) == _normalize(g) for r, g in zip(rendered, gold))


def cmd_stats(args):
    joined = _load_joined(args)
    rows = _labeled_graphs(joined, args.literal_c)
    counts = dict.fromkeys(LABELS, 0)
    for _, _, _, lg in rows:
        for lab in lg.labels:
            counts[lab] += 1
    total = sum(counts.values())
    freqs = np.asarray([counts[lab] / total for lab in LABELS])
    weights = _model.inverse_class_weights(freqs)
    print(f"examples: {len(rows)}")
    print(f"triples: {total}")
    for i, lab in enumerate(LABELS):
        print(f"{lab}: count={counts[lab]} freq={100.0 * freqs[i]:.2f}% "
              f"weight={weights[i]:.4f}")
    return EXIT_OK


_COMMANDS = {
    "make-labels": cmd_make_labels,
    "train": cmd_train,
    "decompose": cmd_decompose,
    "evaluate": cmd_evaluate,
    "oracle-roundtrip": cmd_oracle_roundtrip,
    "stats": cmd_stats,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
