"""Synthetic sentence fixtures: template sentences with hand-built
dependency parses and gold decompositions, covering conjoined verb
phrases, conjoined clauses, relative clauses, subordinate clauses,
sentence-initial connectives, and already-simple sentences.

Every fixture is reconstructible by design (gold tokens are drawn from
the source), so they exercise the gold-label round trip as well as
training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from clausesplit.corpus import DependencyParse, Example, tokens_from_words

NAMES = ["Mira", "Anton", "Kiran", "Leila", "Tomas", "Ruth", "Omar",
         "Priya", "Edgar", "Nadia", "Selma", "Viktor"]
VERBS = ["painted", "sold", "built", "opened", "repaired", "planted",
         "carried", "cleaned", "designed", "borrowed"]
NOUNS = ["house", "bridge", "garden", "engine", "mural", "boat",
         "bakery", "fence", "table", "orchard"]
PLACES = ["Lisbon", "Nairobi", "Quito", "Oslo", "Hanoi", "Tunis",
          "Porto", "Lima"]
PARTICIPLES = ["raised", "trained", "educated", "praised", "honored",
               "promoted"]
ADJECTIVES = ["old", "small", "bright", "quiet", "tall", "narrow"]
NUMBERS = ["17", "20", "25", "30", "12"]
CONNECTIVES = ["But", "So", "Yet"]

FIN = "VerbForm=Fin"


@dataclass
class Row:
    """One pre-parsed token: form, POS, feats, basic head/relation, and
    any extra (enhanced) arcs as (head, relation) pairs."""

    form: str
    upos: str
    feats: str
    head: int
    deprel: str
    extra: tuple = ()


def _parse(rows):
    arcs = []
    for i, row in enumerate(rows, start=1):
        arcs.append((row.head, i, row.deprel))
        for head, rel in row.extra:
            arcs.append((head, i, rel))
    return DependencyParse(
        arcs=tuple(arcs),
        pos_tags=tuple(r.upos for r in rows),
        morph_features=tuple(
            dict(kv.split("=", 1) for kv in r.feats.split("|")) if r.feats != "_" else {}
            for r in rows),
    )


def conllu_block(sent_id, rows):
    lines = [f"# sent_id = {sent_id}",
             f"# text = {' '.join(r.form for r in rows)}"]
    for i, row in enumerate(rows, start=1):
        deps = [(row.head, row.deprel)] + list(row.extra)
        deps_col = "|".join(f"{h}:{rel}" for h, rel in sorted(deps))
        lines.append("\t".join([
            str(i), row.form, row.form.lower(), row.upos, "_",
            row.feats, str(row.head), row.deprel, deps_col, "_",
        ]))
    return "\n".join(lines) + "\n"


def _pick(rng, pool, k=1):
    picks = rng.choice(len(pool), size=k, replace=False)
    chosen = [pool[int(i)] for i in picks]
    return chosen[0] if k == 1 else chosen


def t_identity(rng):
    adj = _pick(rng, ADJECTIVES)
    noun, noun2 = _pick(rng, NOUNS, 2)
    verb = _pick(rng, VERBS)
    rows = [
        Row("The", "DET", "_", 3, "det"),
        Row(adj, "ADJ", "_", 3, "amod"),
        Row(noun, "NOUN", "_", 4, "nsubj"),
        Row(verb, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 6, "det"),
        Row(noun2, "NOUN", "_", 4, "obj"),
        Row(".", "PUNCT", "_", 4, "punct"),
    ]
    words = [r.form for r in rows]
    return rows, [words]


def t_identity_adverb(rng):
    # non-adjacent subject: a dependency-only nsubj edge labeled Accept,
    # so relation identity alone cannot give Copy away
    name = _pick(rng, NAMES)
    adv = _pick(rng, ["quietly", "often", "finally", "carefully"])
    verb = _pick(rng, VERBS)
    noun = _pick(rng, NOUNS)
    rows = [
        Row(name, "PROPN", "_", 3, "nsubj"),
        Row(adv, "ADV", "_", 3, "advmod"),
        Row(verb, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 5, "det"),
        Row(noun, "NOUN", "_", 3, "obj"),
        Row(".", "PUNCT", "_", 3, "punct"),
    ]
    words = [r.form for r in rows]
    return rows, [words]


def t_np_conj_clause(rng):
    # the same "and" type twice: kept inside a compound object, dropped
    # at the clause boundary, so the edit decision needs position
    name1, name2 = _pick(rng, NAMES, 2)
    v1, v2 = _pick(rng, VERBS, 2)
    n1, n2, n3 = _pick(rng, NOUNS, 3)
    rows = [
        Row(name1, "PROPN", "_", 2, "nsubj"),
        Row(v1, "VERB", FIN, 0, "root"),
        Row(n1, "NOUN", "_", 2, "obj"),
        Row("and", "CCONJ", "_", 5, "cc"),
        Row(n2, "NOUN", "_", 3, "conj"),
        Row("and", "CCONJ", "_", 8, "cc"),
        Row(name2, "PROPN", "_", 8, "nsubj"),
        Row(v2, "VERB", FIN, 2, "conj"),
        Row("the", "DET", "_", 10, "det"),
        Row(n3, "NOUN", "_", 8, "obj"),
        Row(".", "PUNCT", "_", 2, "punct"),
    ]
    gold = [[name1, v1, n1, "and", n2, "."], [name2, v2, "the", n3, "."]]
    return rows, gold


def t_np_conj_twin(rng):
    # both "and" tokens sit between a noun and "the": one joins a
    # compound object (kept), one joins clauses (dropped), and only
    # position tells them apart
    n1, n2, n3, n4 = _pick(rng, NOUNS, 4)
    name = _pick(rng, NAMES)
    v1, v2 = _pick(rng, VERBS, 2)
    rows = [
        Row(name, "PROPN", "_", 2, "nsubj"),
        Row(v1, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 4, "det"),
        Row(n1, "NOUN", "_", 2, "obj"),
        Row("and", "CCONJ", "_", 7, "cc"),
        Row("the", "DET", "_", 7, "det"),
        Row(n2, "NOUN", "_", 4, "conj"),
        Row("and", "CCONJ", "_", 11, "cc"),
        Row("the", "DET", "_", 10, "det"),
        Row(n3, "NOUN", "_", 11, "nsubj"),
        Row(v2, "VERB", FIN, 2, "conj"),
        Row("the", "DET", "_", 13, "det"),
        Row(n4, "NOUN", "_", 11, "obj"),
        Row(".", "PUNCT", "_", 2, "punct"),
    ]
    gold = [[name, v1, "the", n1, "and", "the", n2, "."],
            ["the", n3, v2, "the", n4, "."]]
    return rows, gold


def t_vp_conj_passive(rng):
    name = _pick(rng, NAMES)
    p1, p2 = _pick(rng, PARTICIPLES, 2)
    place = _pick(rng, PLACES)
    num = _pick(rng, NUMBERS)
    rows = [
        Row(name, "PROPN", "_", 3, "nsubj", extra=((8, "nsubj"),)),
        Row("was", "AUX", FIN, 3, "aux"),
        Row(p1, "VERB", "VerbForm=Part", 0, "root"),
        Row("in", "ADP", "_", 5, "case"),
        Row(place, "PROPN", "_", 3, "obl"),
        Row("and", "CCONJ", "_", 8, "cc"),
        Row("was", "AUX", FIN, 8, "aux"),
        Row(p2, "VERB", "VerbForm=Part", 3, "conj"),
        Row("at", "ADP", "_", 10, "case"),
        Row(num, "NUM", "_", 8, "obl"),
        Row(".", "PUNCT", "_", 3, "punct"),
    ]
    gold = [[name, "was", p1, "in", place, "."],
            [name, "was", p2, "at", num, "."]]
    return rows, gold


def t_vp_conj_active(rng):
    name = _pick(rng, NAMES)
    v1, v2 = _pick(rng, VERBS, 2)
    n1, n2 = _pick(rng, NOUNS, 2)
    rows = [
        Row(name, "PROPN", "_", 2, "nsubj", extra=((6, "nsubj"),)),
        Row(v1, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 4, "det"),
        Row(n1, "NOUN", "_", 2, "obj"),
        Row("and", "CCONJ", "_", 6, "cc"),
        Row(v2, "VERB", FIN, 2, "conj"),
        Row("the", "DET", "_", 8, "det"),
        Row(n2, "NOUN", "_", 6, "obj"),
        Row(".", "PUNCT", "_", 2, "punct"),
    ]
    gold = [[name, v1, "the", n1, "."], [name, v2, "the", n2, "."]]
    return rows, gold


def t_s_conj(rng):
    name1, name2 = _pick(rng, NAMES, 2)
    v1, v2 = _pick(rng, VERBS, 2)
    n1, n2 = _pick(rng, NOUNS, 2)
    rows = [
        Row(name1, "PROPN", "_", 2, "nsubj"),
        Row(v1, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 4, "det"),
        Row(n1, "NOUN", "_", 2, "obj"),
        Row("and", "CCONJ", "_", 7, "cc"),
        Row(name2, "PROPN", "_", 7, "nsubj"),
        Row(v2, "VERB", FIN, 2, "conj"),
        Row("the", "DET", "_", 9, "det"),
        Row(n2, "NOUN", "_", 7, "obj"),
        Row(".", "PUNCT", "_", 2, "punct"),
    ]
    gold = [[name1, v1, "the", n1, "."], [name2, v2, "the", n2, "."]]
    return rows, gold


def t_relative_clause(rng):
    name = _pick(rng, NAMES)
    v1, v2 = _pick(rng, VERBS, 2)
    place = _pick(rng, PLACES)
    noun = _pick(rng, NOUNS)
    rows = [
        Row(name, "PROPN", "_", 8, "nsubj", extra=((4, "nsubj"),)),
        Row(",", "PUNCT", "_", 4, "punct"),
        Row("who", "PRON", "_", 4, "nsubj"),
        Row(v1, "VERB", FIN, 1, "acl"),
        Row("in", "ADP", "_", 6, "case"),
        Row(place, "PROPN", "_", 4, "obl"),
        Row(",", "PUNCT", "_", 4, "punct"),
        Row(v2, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 10, "det"),
        Row(noun, "NOUN", "_", 8, "obj"),
        Row(".", "PUNCT", "_", 8, "punct"),
    ]
    # annotators rewrite segments in their linear order, so the relative
    # clause comes out first
    gold = [[name, v1, "in", place, "."], [name, v2, "the", noun, "."]]
    return rows, gold


def t_subordinate(rng):
    name1, name2 = _pick(rng, NAMES, 2)
    v1, v2 = _pick(rng, VERBS, 2)
    n1, n2 = _pick(rng, NOUNS, 2)
    rows = [
        Row(name1, "PROPN", "_", 2, "nsubj"),
        Row(v1, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 4, "det"),
        Row(n1, "NOUN", "_", 2, "obj"),
        Row("because", "SCONJ", "_", 7, "mark"),
        Row(name2, "PROPN", "_", 7, "nsubj"),
        Row(v2, "VERB", FIN, 2, "advcl"),
        Row("the", "DET", "_", 9, "det"),
        Row(n2, "NOUN", "_", 7, "obj"),
        Row(".", "PUNCT", "_", 2, "punct"),
    ]
    gold = [[name1, v1, "the", n1, "."], [name2, v2, "the", n2, "."]]
    return rows, gold


def t_initial_connective(rng):
    conn = _pick(rng, CONNECTIVES)
    name = _pick(rng, NAMES)
    verb = _pick(rng, VERBS)
    noun = _pick(rng, NOUNS)
    rows = [
        Row(conn, "CCONJ", "_", 3, "cc"),
        Row(name, "PROPN", "_", 3, "nsubj"),
        Row(verb, "VERB", FIN, 0, "root"),
        Row("the", "DET", "_", 5, "det"),
        Row(noun, "NOUN", "_", 3, "obj"),
        Row(".", "PUNCT", "_", 3, "punct"),
    ]
    gold = [[name, verb, "the", noun, "."]]
    return rows, gold


TEMPLATES = {
    "identity": t_identity,
    "identity_adverb": t_identity_adverb,
    "np_conj_clause": t_np_conj_clause,
    "np_conj_twin": t_np_conj_twin,
    "vp_conj_passive": t_vp_conj_passive,
    "vp_conj_active": t_vp_conj_active,
    "s_conj": t_s_conj,
    "relative_clause": t_relative_clause,
    "subordinate": t_subordinate,
    "initial_connective": t_initial_connective,
}

# complex-heavy: all four edit labels get solid support
OVERFIT_MIX = {
    "identity": 0.08, "identity_adverb": 0.08, "np_conj_clause": 0.06,
    "np_conj_twin": 0.08, "vp_conj_passive": 0.16, "vp_conj_active": 0.14,
    "s_conj": 0.13, "relative_clause": 0.15, "subordinate": 0.09,
    "initial_connective": 0.03,
}

# simple-sentence heavy: label distribution skews hard toward Accept,
# matching the published imbalance (~85% A)
IMBALANCED_MIX = {
    "identity": 0.42, "identity_adverb": 0.26, "np_conj_clause": 0.04,
    "np_conj_twin": 0.10, "vp_conj_passive": 0.04, "vp_conj_active": 0.03,
    "s_conj": 0.04, "relative_clause": 0.025, "subordinate": 0.03,
    "initial_connective": 0.015,
}

# the oracle fixtures stay complex: conjunctions and relative clauses
ORACLE_MIX = {
    "identity": 0.07, "identity_adverb": 0.07, "np_conj_clause": 0.07,
    "np_conj_twin": 0.07, "vp_conj_passive": 0.16, "vp_conj_active": 0.14,
    "s_conj": 0.14, "relative_clause": 0.15, "subordinate": 0.09,
    "initial_connective": 0.04,
}


def make_examples(n, mix=ORACLE_MIX, seed=0):
    """Deterministically generate n parsed Examples with ids "1".."n"."""
    rng = np.random.default_rng(seed)
    names = sorted(mix)
    weights = np.asarray([mix[name] for name in names], dtype=np.float64)
    weights = weights / weights.sum()
    examples = []
    rows_by_id = {}
    for i in range(n):
        template = TEMPLATES[names[int(rng.choice(len(names), p=weights))]]
        rows, gold = template(rng)
        ex = Example(
            id=str(i + 1),
            source=tokens_from_words([r.form for r in rows]),
            parse=_parse(rows),
            gold_outputs=tuple(tuple(g) for g in gold),
        )
        examples.append(ex)
        rows_by_id[ex.id] = rows
    return examples, rows_by_id


def write_corpus_files(examples, rows_by_id, src_path, conllu_path,
                       separator="<::::>"):
    with open(src_path, "w", encoding="utf-8") as f:
        for ex in examples:
            targets = f" {separator} ".join(" ".join(g) for g in ex.gold_outputs)
            f.write(" ".join(ex.surfaces) + "\t" + targets + "\n")
    with open(conllu_path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(conllu_block(ex.id, rows_by_id[ex.id]))
            f.write("\n")
