"""Corpus ingestion: parallel decomposition data, CoNLL-U parses,
vocabulary and pretrained word vectors.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CorpusFormatError, DataError

DEFAULT_SEPARATOR = "<::::>"

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class Token:
    surface: str
    index: int  # 1-based position in the sentence

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True)
class DependencyParse:
    """Arcs (head, dependent, relation) with head 0 reserved for the root,
    plus per-token POS tags and morphological features.

    ``arcs`` holds the basic tree merged with any enhanced arcs from the
    DEPS column (e.g. propagated subjects), deduplicated.
    """

    arcs: tuple
    pos_tags: tuple
    morph_features: tuple  # per token: dict of feature -> value

    def __len__(self):
        return len(self.pos_tags)

    def finite_verb_indices(self):
        return [i + 1 for i, feats in enumerate(self.morph_features)
                if feats.get("VerbForm") == "Fin"]

    def has_morphology(self):
        return any(self.morph_features)


@dataclass(frozen=True)
class Example:
    id: str
    source: tuple  # of Token
    parse: DependencyParse | None = None
    gold_outputs: tuple = ()  # of token-string tuples; may be empty at inference

    @property
    def surfaces(self):
        return [t.surface for t in self.source]


def tokens_from_words(words):
    """Wrap a pre-tokenized word list into 1-indexed Tokens."""
    return tuple(Token(w, i + 1) for i, w in enumerate(words))


def read_parallel_corpus(path, separator=DEFAULT_SEPARATOR):
    """Read `source<TAB>target1 <sep> target2 ...` lines into Examples.

    Example ids are the 1-based line numbers as strings.  Malformed lines
    raise CorpusFormatError naming the line.
    """
    examples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise CorpusFormatError("expected a TAB between source and targets",
                                        path=path, line=lineno)
            src_part, tgt_part = line.split("\t", 1)
            source = src_part.split()
            targets = [t.split() for t in tgt_part.split(separator)]
            targets = [t for t in targets if t]
            if not source:
                raise CorpusFormatError("empty source", path=path, line=lineno)
            if not targets:
                raise CorpusFormatError("empty target list", path=path, line=lineno)
            examples.append(Example(id=str(lineno),
                                    source=tokens_from_words(source),
                                    gold_outputs=tuple(tuple(t) for t in targets)))
    return examples


def write_parallel_corpus(examples, path, separator=DEFAULT_SEPARATOR):
    """Serialize Examples back to the parallel text format."""
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            targets = f" {separator} ".join(" ".join(t) for t in ex.gold_outputs)
            f.write(" ".join(ex.surfaces) + "\t" + targets + "\n")


def _parse_feats(feats):
    if feats in ("_", ""):
        return {}
    out = {}
    for item in feats.split("|"):
        if "=" in item:
            key, value = item.split("=", 1)
            out[key] = value
    return out


def read_conllu(path):
    """Read CoNLL-U into a map sent_id -> DependencyParse.

    Requires `# sent_id = <id>` comments.  Basic arcs come from
    HEAD/DEPREL; arcs in the DEPS column are merged in (this is where
    propagated subjects live).  Multiword-token and empty-node rows are
    ignored, as are enhanced arcs whose head is an empty node.
    """
    parses = {}
    sent_id = None
    rows = []

    def flush(lineno):
        nonlocal sent_id, rows
        if not rows:
            sent_id = None
            return
        if sent_id is None:
            raise CorpusFormatError("sentence block without a sent_id comment",
                                    path=path, line=lineno)
        if sent_id in parses:
            raise CorpusFormatError(f"duplicate parse id {sent_id!r}",
                                    path=path, line=lineno)
        n = len(rows)
        arcs = []
        pos = []
        morph = []
        seen = set()
        for tok_id, cols, rowline in rows:
            head = int(cols[6])
            if head > n or tok_id > n:
                raise CorpusFormatError(
                    f"head index {head} out of range for sentence of length {n}",
                    path=path, line=rowline)
            arcs.append((head, tok_id, cols[7]))
            seen.add((head, tok_id, cols[7]))
            pos.append(cols[3])
            morph.append(_parse_feats(cols[5]))
            if cols[8] not in ("_", ""):
                for dep in cols[8].split("|"):
                    if ":" not in dep:
                        raise CorpusFormatError(f"bad DEPS entry {dep!r}",
                                                path=path, line=rowline)
                    head_str, rel = dep.split(":", 1)
                    if not head_str.isdigit():
                        continue  # enhanced arc anchored on an empty node
                    ehead = int(head_str)
                    if ehead > n:
                        raise CorpusFormatError(
                            f"enhanced head {ehead} out of range", path=path, line=rowline)
                    arc = (ehead, tok_id, rel)
                    if arc not in seen:
                        seen.add(arc)
                        arcs.append(arc)
        parses[sent_id] = DependencyParse(arcs=tuple(arcs), pos_tags=tuple(pos),
                                          morph_features=tuple(morph))
        sent_id = None
        rows = []

    with open(path, encoding="utf-8") as f:
        lineno = 0
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                flush(lineno)
                continue
            if line.startswith("#"):
                if line.startswith("# sent_id"):
                    sent_id = line.split("=", 1)[1].strip()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise CorpusFormatError(
                    f"expected 10 tab-separated columns, got {len(cols)}",
                    path=path, line=lineno)
            if "-" in cols[0] or "." in cols[0]:
                continue  # multiword-token range or empty node
            rows.append((int(cols[0]), cols, lineno))
        flush(lineno + 1)
    return parses


@dataclass(frozen=True)
class ExclusionRecord:
    example_id: str
    reason: str


def attach_parses(examples, parses):
    """Join Examples with their parses by id.

    Returns (joined, excluded); an example is excluded when its parse is
    missing or has a different token count.  Nothing is silently dropped:
    len(joined) + len(excluded) == len(examples).
    """
    joined = []
    excluded = []
    for ex in examples:
        parse = parses.get(ex.id)
        if parse is None:
            excluded.append(ExclusionRecord(ex.id, "missing parse"))
            continue
        if len(parse) != len(ex.source):
            excluded.append(ExclusionRecord(
                ex.id, f"length mismatch: parse {len(parse)} vs source {len(ex.source)}"))
            continue
        joined.append(Example(id=ex.id, source=ex.source, parse=parse,
                              gold_outputs=ex.gold_outputs))
    return joined, excluded


def seeded_vector(token, dim, scale=0.4):
    """Deterministic pseudo-random vector derived from the token text.

    Stable across runs and platforms; distinct rare words get distinct
    vectors instead of collapsing onto zeros.  The scale matches typical
    pretrained-vector magnitudes so these rows sit alongside them.
    """
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng(seed)
    return (rng.standard_normal(dim) * scale).astype(np.float32)


def read_word_vectors(path):
    """Read `token v1 v2 ... vE` lines; returns (dict token -> vector, dim)."""
    vectors = {}
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise CorpusFormatError(
                    f"vector for {token!r} has {len(values)} values, expected {dim}",
                    path=path, line=lineno)
            vectors[token] = np.asarray([float(v) for v in values], dtype=np.float32)
    return vectors, dim


@dataclass
class Vocabulary:
    """Token ids plus the embedding matrix; PAD and UNK are reserved."""

    tokens: list
    ids: dict
    vectors: np.ndarray
    pad_id: int = 0
    unk_id: int = 1

    def __len__(self):
        return len(self.tokens)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def lookup(self, token):
        return self.ids.get(token, self.unk_id)


def build_vocab(examples, embedding_file=None, dim=100):
    """Assign ids to all source tokens and assemble the embedding matrix.

    Tokens found in the vector file use its rows; the rest get a vector
    seeded by their text.  UNK is the mean of the loaded vectors (seeded
    when nothing loaded), PAD is zeros.  Deterministic: identical inputs
    give a bit-identical matrix.
    """
    file_vectors = {}
    if embedding_file is not None:
        file_vectors, file_dim = read_word_vectors(embedding_file)
        if file_dim is not None:
            dim = file_dim

    tokens = [PAD_TOKEN, UNK_TOKEN]
    seen = set(tokens)
    for ex in examples:
        for tok in ex.source:
            if tok.surface not in seen:
                seen.add(tok.surface)
                tokens.append(tok.surface)

    matrix = np.zeros((len(tokens), dim), dtype=np.float32)
    loaded = []
    for i, token in enumerate(tokens[2:], start=2):
        vec = file_vectors.get(token)
        if vec is None:
            matrix[i] = seeded_vector(token, dim)
        else:
            matrix[i] = vec
            loaded.append(vec)
    if loaded:
        matrix[1] = np.mean(np.stack(loaded), axis=0)
    else:
        matrix[1] = seeded_vector(UNK_TOKEN, dim)

    ids = {tok: i for i, tok in enumerate(tokens)}
    return Vocabulary(tokens=tokens, ids=ids, vectors=matrix)


def filter_tensed_match(example):
    """Keep an example iff its finite-verb count equals its gold sentence
    count.  Advisory: with no morphology at all the example is kept and a
    warning is emitted."""
    if example.parse is None:
        raise DataError(f"example {example.id}: no parse attached")
    if not example.parse.has_morphology():
        warnings.warn(f"example {example.id}: parse has no morphological features; "
                      "keeping it unfiltered")
        return True
    finite = len(example.parse.finite_verb_indices())
    return finite == len(example.gold_outputs)
