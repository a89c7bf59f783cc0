"""Parser backends.

A backend turns batches of pre-tokenized sentences into TokenRow lists
(basic tree only; subject propagation is applied afterwards by the
adapter).  ``spacy`` wraps an installed spaCy pipeline in pre-tokenized
mode.  ``pattern`` is a deterministic annotator for a closed grammar of
sentence shapes, which keeps the toolchain runnable where no parser can
be installed; it is not a parser, and sentences outside its grammar are
reported as failures (the adapter then writes placeholder parses).
"""

from __future__ import annotations

from .adapter import TokenRow

FIN = "VerbForm=Fin"


class BackendUnavailable(RuntimeError):
    pass


class SpacyBackend:
    """spaCy pipeline in pre-tokenized mode; one row per input token."""

    name = "spacy"

    def __init__(self, model="en_core_web_sm"):
        try:
            import spacy
        except ImportError as exc:
            raise BackendUnavailable("spacy is not installed") from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise BackendUnavailable(f"spacy model {model!r} is not installed") from exc
        self._spacy = spacy

    def parse_batch(self, word_lists):
        from spacy.tokens import Doc

        out = []
        for words in word_lists:
            doc = Doc(self._nlp.vocab, words=list(words))
            for _, component in self._nlp.pipeline:
                doc = component(doc)
            rows = []
            for token in doc:
                head = 0 if token.head.i == token.i else token.head.i + 1
                deprel = token.dep_.lower()
                if deprel == "root":
                    head = 0
                rows.append(TokenRow(
                    form=token.text, upos=token.pos_ or "X",
                    feats=str(token.morph) or "_", head=head,
                    deprel=deprel or "dep", lemma=token.lemma_ or None,
                    xpos=token.tag_ or "_"))
            out.append(rows)
        return out


ADVERBS = {"quietly", "often", "finally", "carefully"}
CONNECTIVES = {"but", "so", "yet"}


def _rows(words, spec, finite):
    """Build TokenRows from (upos, head, deprel) per position."""
    rows = []
    for i, (word, (upos, head, deprel)) in enumerate(zip(words, spec), start=1):
        rows.append(TokenRow(form=word, upos=upos,
                             feats=FIN if i in finite else "_",
                             head=head, deprel=deprel))
    return rows


def _match_simple_svo(words, low):
    # The ADJ NOUN VERB the NOUN .
    if len(words) == 7 and low[0] == "the" and low[4] == "the" and low[6] == ".":
        return _rows(words, [("DET", 3, "det"), ("ADJ", 3, "amod"),
                             ("NOUN", 4, "nsubj"), ("VERB", 0, "root"),
                             ("DET", 6, "det"), ("NOUN", 4, "obj"),
                             ("PUNCT", 4, "punct")], {4})
    return None


def _match_subject_adverb(words, low):
    # NAME ADV VERB the NOUN .
    if len(words) == 6 and low[1] in ADVERBS and low[3] == "the" and low[5] == ".":
        return _rows(words, [("PROPN", 3, "nsubj"), ("ADV", 3, "advmod"),
                             ("VERB", 0, "root"), ("DET", 5, "det"),
                             ("NOUN", 3, "obj"), ("PUNCT", 3, "punct")], {3})
    return None


def _match_clause_pair_with_np_conj(words, low):
    # NAME VERB NOUN and NOUN and NAME VERB the NOUN .
    if (len(words) == 11 and low[3] == "and" and low[5] == "and"
            and low[8] == "the" and low[10] == "."):
        return _rows(words, [("PROPN", 2, "nsubj"), ("VERB", 0, "root"),
                             ("NOUN", 2, "obj"), ("CCONJ", 5, "cc"),
                             ("NOUN", 3, "conj"), ("CCONJ", 8, "cc"),
                             ("PROPN", 8, "nsubj"), ("VERB", 2, "conj"),
                             ("DET", 10, "det"), ("NOUN", 8, "obj"),
                             ("PUNCT", 2, "punct")], {2, 8})
    return None


def _match_twin_np_conj(words, low):
    # NAME VERB the NOUN and the NOUN and the NOUN VERB the NOUN .
    if (len(words) == 14 and low[2] == "the" and low[4] == "and"
            and low[5] == "the" and low[7] == "and" and low[8] == "the"
            and low[11] == "the" and low[13] == "."):
        return _rows(words, [("PROPN", 2, "nsubj"), ("VERB", 0, "root"),
                             ("DET", 4, "det"), ("NOUN", 2, "obj"),
                             ("CCONJ", 7, "cc"), ("DET", 7, "det"),
                             ("NOUN", 4, "conj"), ("CCONJ", 11, "cc"),
                             ("DET", 10, "det"), ("NOUN", 11, "nsubj"),
                             ("VERB", 2, "conj"), ("DET", 13, "det"),
                             ("NOUN", 11, "obj"), ("PUNCT", 2, "punct")],
                     {2, 11})
    return None


def _match_conjoined_passive_vp(words, low):
    # NAME was PART in PLACE and was PART at NUM .
    if (len(words) == 11 and low[1] == "was" and low[3] == "in"
            and low[5] == "and" and low[6] == "was" and low[8] == "at"
            and low[10] == "."):
        return _rows(words, [("PROPN", 3, "nsubj"), ("AUX", 3, "aux"),
                             ("VERB", 0, "root"), ("ADP", 5, "case"),
                             ("PROPN", 3, "obl"), ("CCONJ", 8, "cc"),
                             ("AUX", 8, "aux"), ("VERB", 3, "conj"),
                             ("ADP", 10, "case"), ("NUM", 8, "obl"),
                             ("PUNCT", 3, "punct")], {2, 7})
    return None


def _match_conjoined_active_vp(words, low):
    # NAME VERB the NOUN and VERB the NOUN .
    if (len(words) == 9 and low[2] == "the" and low[4] == "and"
            and low[6] == "the" and low[8] == "."):
        return _rows(words, [("PROPN", 2, "nsubj"), ("VERB", 0, "root"),
                             ("DET", 4, "det"), ("NOUN", 2, "obj"),
                             ("CCONJ", 6, "cc"), ("VERB", 2, "conj"),
                             ("DET", 8, "det"), ("NOUN", 6, "obj"),
                             ("PUNCT", 2, "punct")], {2, 6})
    return None


def _match_conjoined_clauses(words, low):
    # NAME VERB the NOUN and NAME VERB the NOUN .
    if (len(words) == 10 and low[2] == "the" and low[4] == "and"
            and low[7] == "the" and low[9] == "."):
        return _rows(words, [("PROPN", 2, "nsubj"), ("VERB", 0, "root"),
                             ("DET", 4, "det"), ("NOUN", 2, "obj"),
                             ("CCONJ", 7, "cc"), ("PROPN", 7, "nsubj"),
                             ("VERB", 2, "conj"), ("DET", 9, "det"),
                             ("NOUN", 7, "obj"), ("PUNCT", 2, "punct")],
                     {2, 7})
    return None


def _match_relative_clause(words, low):
    # NAME , who VERB in PLACE , VERB the NOUN .
    if (len(words) == 11 and low[1] == "," and low[2] == "who"
            and low[4] == "in" and low[6] == "," and low[8] == "the"
            and low[10] == "."):
        return _rows(words, [("PROPN", 8, "nsubj"), ("PUNCT", 4, "punct"),
                             ("PRON", 4, "nsubj"), ("VERB", 1, "acl"),
                             ("ADP", 6, "case"), ("PROPN", 4, "obl"),
                             ("PUNCT", 4, "punct"), ("VERB", 0, "root"),
                             ("DET", 10, "det"), ("NOUN", 8, "obj"),
                             ("PUNCT", 8, "punct")], {4, 8})
    return None


def _match_subordinate(words, low):
    # NAME VERB the NOUN because NAME VERB the NOUN .
    if (len(words) == 10 and low[2] == "the" and low[4] == "because"
            and low[7] == "the" and low[9] == "."):
        return _rows(words, [("PROPN", 2, "nsubj"), ("VERB", 0, "root"),
                             ("DET", 4, "det"), ("NOUN", 2, "obj"),
                             ("SCONJ", 7, "mark"), ("PROPN", 7, "nsubj"),
                             ("VERB", 2, "advcl"), ("DET", 9, "det"),
                             ("NOUN", 7, "obj"), ("PUNCT", 2, "punct")],
                     {2, 7})
    return None


def _match_initial_connective(words, low):
    # CONN NAME VERB the NOUN .
    if (len(words) == 6 and low[0] in CONNECTIVES and low[3] == "the"
            and low[5] == "."):
        return _rows(words, [("CCONJ", 3, "cc"), ("PROPN", 3, "nsubj"),
                             ("VERB", 0, "root"), ("DET", 5, "det"),
                             ("NOUN", 3, "obj"), ("PUNCT", 3, "punct")], {3})
    return None


def _match_bare_sv(words, low):
    # SUBJ VERB .
    if len(words) == 3 and low[2] == ".":
        return _rows(words, [("PRON", 2, "nsubj"), ("VERB", 0, "root"),
                             ("PUNCT", 2, "punct")], {2})
    return None


_PATTERNS = [
    _match_simple_svo,
    _match_subject_adverb,
    _match_twin_np_conj,
    _match_clause_pair_with_np_conj,
    _match_conjoined_passive_vp,
    _match_conjoined_active_vp,
    _match_conjoined_clauses,
    _match_relative_clause,
    _match_subordinate,
    _match_initial_connective,
    _match_bare_sv,
]


class PatternBackend:
    """Deterministic annotator for a closed grammar of sentence shapes,
    keyed on function-word skeletons.  Sentences outside the grammar
    come back as None (the adapter substitutes a placeholder)."""

    name = "pattern"

    def parse_batch(self, word_lists):
        out = []
        for words in word_lists:
            low = [w.lower() for w in words]
            rows = None
            for pattern in _PATTERNS:
                rows = pattern(list(words), low)
                if rows is not None:
                    break
            out.append(rows)
        return out


def available_backends():
    names = ["pattern"]
    try:
        import spacy  # noqa: F401

        names.insert(0, "spacy")
    except ImportError:
        pass
    return names


def get_backend(name="auto", **kwargs):
    if name == "auto":
        try:
            return SpacyBackend(**kwargs)
        except BackendUnavailable:
            return PatternBackend()
    if name == "spacy":
        return SpacyBackend(**kwargs)
    if name == "pattern":
        return PatternBackend()
    raise ValueError(f"unknown backend {name!r}")
