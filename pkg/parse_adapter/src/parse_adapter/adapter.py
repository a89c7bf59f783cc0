"""Batch parsing of pre-tokenized corpora into CoNLL-U.

Input sentences are never re-tokenized: every output sentence has
exactly the whitespace tokens of its source line, and sentence ids are
the 1-based input line numbers, so downstream joins by id stay aligned.
A backend failure on one sentence produces a flat placeholder parse and
a warning record; the batch never aborts.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class TokenRow:
    """One CoNLL-U token row; ``extra_deps`` holds enhanced arcs beyond
    the basic head as (head, relation) pairs."""

    form: str
    upos: str = "X"
    feats: str = "_"
    head: int = 0
    deprel: str = "dep"
    lemma: str | None = None
    xpos: str = "_"
    extra_deps: list = field(default_factory=list)


@dataclass
class ParseWarning:
    sentence_id: str
    message: str


@dataclass
class AdapterConfig:
    input_path: str
    output_path: str
    backend: str = "auto"
    batch_size: int = 64
    warnings_path: str | None = None


RELATIVE_PRONOUNS = {"who", "which", "that", "whom", "whose"}


def flat_parse(words):
    """Placeholder when a backend fails: first token is the root, the
    rest attach to it."""
    rows = [TokenRow(form=words[0], head=0, deprel="root")]
    rows.extend(TokenRow(form=w, head=1, deprel="dep") for w in words[1:])
    return rows


def propagate_subjects(rows):
    """Add enhanced subject arcs the basic tree leaves implicit.

    Two deterministic graph rules, applied in place:
    - a verb conjoined to another verb inherits the first verb's subject
      when it has none of its own;
    - a relative-clause verb whose subject is a relative pronoun also
      takes the modified noun as its subject.
    """
    n = len(rows)
    subject_of = {}
    for i, row in enumerate(rows, start=1):
        if row.deprel.startswith("nsubj"):
            subject_of.setdefault(row.head, i)

    for i, row in enumerate(rows, start=1):
        if row.deprel.startswith("conj"):
            inherited = subject_of.get(row.head)
            if inherited is not None and i not in subject_of:
                subject = rows[inherited - 1]
                if (i, "nsubj") not in subject.extra_deps:
                    subject.extra_deps.append((i, "nsubj"))
        if row.deprel.startswith("acl"):
            # row i is a clause verb modifying the noun at row.head
            own_subject = subject_of.get(i)
            if own_subject is not None and 1 <= own_subject <= n:
                pronoun = rows[own_subject - 1].form.lower()
                if pronoun in RELATIVE_PRONOUNS:
                    noun = rows[row.head - 1]
                    if (i, "nsubj") not in noun.extra_deps:
                        noun.extra_deps.append((i, "nsubj"))
    return rows


def render_conllu(sentence_id, rows):
    """Format one sentence as a 10-column CoNLL-U block."""
    lines = [f"# sent_id = {sentence_id}",
             f"# text = {' '.join(r.form for r in rows)}"]
    for i, row in enumerate(rows, start=1):
        deps = sorted({(row.head, row.deprel), *map(tuple, row.extra_deps)})
        deps_col = "|".join(f"{h}:{rel}" for h, rel in deps)
        lemma = row.lemma if row.lemma is not None else row.form.lower()
        lines.append("\t".join([
            str(i), row.form, lemma, row.upos, row.xpos, row.feats,
            str(row.head), row.deprel, deps_col, "_",
        ]))
    return "\n".join(lines) + "\n\n"


def read_sources(path):
    """Pre-tokenized sentences from a corpus file; anything after a TAB
    (the rewrite side of a parallel corpus) is ignored.  Yields
    (line_number, words); empty lines yield (line_number, None)."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            source = line.split("\t", 1)[0]
            words = source.split()
            yield lineno, (words if words else None)


def parse_corpus(config, backend=None):
    """Parse every sentence of the input corpus and write CoNLL-U.

    Returns the list of ParseWarning records (also written to
    ``config.warnings_path`` when set).  Per-sentence backend failures
    degrade to a flat placeholder parse instead of aborting.
    """
    from .backends import get_backend

    if backend is None:
        backend = get_backend(config.backend)
    warnings = []
    batch = []

    def flush(out):
        if not batch:
            return
        ids = [str(lineno) for lineno, _ in batch]
        word_lists = [words for _, words in batch]
        try:
            parsed = backend.parse_batch(word_lists)
        except Exception as exc:  # backend died on the whole batch
            parsed = [None] * len(word_lists)
            warnings.append(ParseWarning(ids[0], f"backend batch failure: {exc}"))
        for sid, words, rows in zip(ids, word_lists, parsed):
            if rows is None:
                warnings.append(ParseWarning(sid, "backend failed; flat placeholder"))
                rows = flat_parse(words)
            if len(rows) != len(words):
                warnings.append(ParseWarning(
                    sid, f"backend returned {len(rows)} rows for {len(words)} "
                         "tokens; flat placeholder"))
                rows = flat_parse(words)
            propagate_subjects(rows)
            out.write(render_conllu(sid, rows))
        batch.clear()

    with open(config.output_path, "w", encoding="utf-8") as out:
        for lineno, words in read_sources(config.input_path):
            if words is None:
                warnings.append(ParseWarning(str(lineno), "empty line skipped"))
                continue
            batch.append((lineno, words))
            if len(batch) >= config.batch_size:
                flush(out)
        flush(out)

    if config.warnings_path:
        with open(config.warnings_path, "w", encoding="utf-8") as f:
            for w in warnings:
                f.write(f"{w.sentence_id}\t{w.message}\n")
    return warnings
