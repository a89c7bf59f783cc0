"""Distant supervision: align source tokens with gold simple sentences
and derive an Accept/Break/Copy/Drop label for every edge triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import WordRelationGraph

LABELS = ("A", "B", "C", "D")
LABEL_TO_INDEX = {lab: i for i, lab in enumerate(LABELS)}


@dataclass(frozen=True)
class TokenAlignment:
    """Which gold sentences each source token lands in.

    ``aligned_into[i]`` is the set of 0-based gold-sentence ids that use
    source token i+1; an empty set means the token was dropped by every
    rewrite.  ``insertions[s]`` lists (position, surface) for tokens of
    gold sentence s that matched nothing in the source.
    """

    source_len: int
    aligned_into: tuple  # of frozenset[int], one per source token
    insertions: tuple  # per gold sentence: tuple of (0-based position, surface)
    n_outputs: int

    def home(self, index):
        """Lowest-id gold sentence containing source token ``index`` (1-based),
        or None when the token is dropped."""
        s = self.aligned_into[index - 1]
        return min(s) if s else None

    def is_dropped(self, index):
        return not self.aligned_into[index - 1]

    @property
    def dropped_indices(self):
        return frozenset(i + 1 for i, s in enumerate(self.aligned_into) if not s)


def _lcs_rightmost(gold, source):
    """Match ``gold`` as a subsequence of ``source`` (both lowercased
    token lists), maximizing matches and, among maximal alignments,
    preferring the rightmost source indices.

    Returns a list of (gold_pos, source_pos), both 0-based.
    """
    la, lb = len(gold), len(source)
    table = np.zeros((la + 1, lb + 1), dtype=np.int32)
    for i in range(1, la + 1):
        gi = gold[i - 1]
        row = table[i]
        prev = table[i - 1]
        for j in range(1, lb + 1):
            if gi == source[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                left = row[j - 1]
                up = prev[j]
                row[j] = left if left >= up else up
    # walk back from the far corner, matching as soon as tokens agree;
    # on ties prefer skipping the gold token over the source one, which
    # keeps high source indices available: together these pick, for each
    # gold token, its rightmost feasible position
    pairs = []
    i, j = la, lb
    while i > 0 and j > 0:
        if gold[i - 1] == source[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def align_tokens(source_tokens, gold_outputs):
    """Align every gold sentence independently against the full source.

    Matching is case-insensitive and order-preserving (a longest common
    subsequence per sentence, ties broken toward the rightmost source
    indices).
    """
    surfaces = [getattr(t, "surface", t) for t in source_tokens]
    lowered = [s.lower() for s in surfaces]
    n = len(surfaces)
    aligned = [set() for _ in range(n)]
    insertions = []
    for sent_id, gold in enumerate(gold_outputs):
        gold_lower = [g.lower() for g in gold]
        pairs = _lcs_rightmost(gold_lower, lowered)
        matched_gold = {gp for gp, _ in pairs}
        for _, sp in pairs:
            aligned[sp].add(sent_id)
        insertions.append(tuple(
            (pos, gold[pos]) for pos in range(len(gold)) if pos not in matched_gold
        ))
    return TokenAlignment(
        source_len=n,
        aligned_into=tuple(frozenset(s) for s in aligned),
        insertions=tuple(insertions),
        n_outputs=len(gold_outputs),
    )


_TERMINAL_PUNCT = {".", "!", "?"}


def is_reconstructible(alignment):
    """True iff every gold token has a source alignment, excepting a
    terminal punctuation mark at the end of a gold sentence."""
    for sent in alignment.insertions:
        for pos, surface in sent:
            if surface in _TERMINAL_PUNCT:
                continue
            return False
    return True


@dataclass(frozen=True)
class LabeledGraph:
    """A graph plus one edit label per triple.

    ``drop_set`` carries alignment-dropped vertices that no triple targets
    (e.g. a sentence-initial connective, which is only ever a source);
    the segmenter removes them alongside D-labeled targets.  Predicted
    graphs have an empty drop set.
    """

    graph: WordRelationGraph
    labels: tuple  # of "A" | "B" | "C" | "D", aligned with graph.triples
    drop_set: frozenset = field(default_factory=frozenset)

    def label_counts(self):
        counts = dict.fromkeys(LABELS, 0)
        for lab in self.labels:
            counts[lab] += 1
        return counts


def create_labels(graph, alignment, mode="default"):
    """Assign an edit label to every triple.

    Default mode, in order of precedence: target dropped -> D; source
    dropped -> B; same home sentence -> A; different homes on a
    dependency-only triple whose source also lands in the target's home
    -> C (the duplicated-subject case); anything else -> B.

    "literal" mode follows the looser published wording: any pair sharing
    an output sentence is A, or C when connected by dependency alone,
    which marks far more C edges.
    """
    if mode not in ("default", "literal"):
        raise ValueError(f"unknown label mode {mode!r}")
    labels = []
    for t in graph.triples:
        if alignment.is_dropped(t.tgt):
            labels.append("D")
        elif alignment.is_dropped(t.src):
            labels.append("B")
        elif mode == "default":
            hs = alignment.home(t.src)
            ht = alignment.home(t.tgt)
            if hs == ht:
                labels.append("A")
            elif t.dependency_only() and ht in alignment.aligned_into[t.src - 1]:
                labels.append("C")
            else:
                labels.append("B")
        else:
            common = alignment.aligned_into[t.src - 1] & alignment.aligned_into[t.tgt - 1]
            if not common:
                labels.append("B")
            elif t.dependency_only():
                labels.append("C")
            else:
                labels.append("A")
    return LabeledGraph(graph=graph, labels=tuple(labels),
                        drop_set=alignment.dropped_indices)


def write_label_cache(path, items):
    """Persist labeled graphs for training reuse.

    ``items`` yields (example_id, LabeledGraph); one line per triple:
    example_id, src, tgt, comma-joined labelset, edit.
    """
    with open(path, "w", encoding="utf-8") as f:
        for example_id, lg in items:
            for t, lab in zip(lg.graph.triples, lg.labels):
                labelset = ",".join(sorted(t.labels))
                f.write(f"{example_id}\t{t.src}\t{t.tgt}\t{labelset}\t{lab}\n")


def read_label_cache(path):
    """Read a label cache into {example_id: {(src, tgt): edit}}."""
    cache = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            example_id, src, tgt, _labelset, edit = line.split("\t")
            cache.setdefault(example_id, {})[(int(src), int(tgt))] = edit
    return cache
