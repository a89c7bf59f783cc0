"""Execute edit labels on a word relation graph and render the resulting
connected components as simple sentences.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

from .graph import build_graph

_PUNCT_CHARS = set(string.punctuation)
TERMINAL_PUNCT = {".", "!", "?"}


def _is_punct(surface):
    return all(ch in _PUNCT_CHARS for ch in surface)


@dataclass
class EditedGraph:
    """Surviving triples after edits, plus the copy list from C edits and
    the set of dropped vertices."""

    vertex_count: int
    triples: list
    copies: list  # (src, tgt) pairs, in triple order
    dropped: set


def apply_edits(labeled_graph):
    """A keeps an edge, B removes it, C removes it and queues (src, tgt)
    for subject copying, D removes it and drops the target word.  Dropped
    vertices lose all incident edges."""
    graph = labeled_graph.graph
    dropped = set(labeled_graph.drop_set)
    copies = []
    for t, lab in zip(graph.triples, labeled_graph.labels):
        if lab == "C":
            copies.append((t.src, t.tgt))
        elif lab == "D":
            dropped.add(t.tgt)
    surviving = [
        t for t, lab in zip(graph.triples, labeled_graph.labels)
        if lab == "A" and t.src not in dropped and t.tgt not in dropped
    ]
    return EditedGraph(vertex_count=len(graph), triples=surviving,
                       copies=copies, dropped=dropped)


def find_components(edited):
    """Connected components over the surviving triples, directions
    ignored.  Iterative depth-first search over a flat adjacency layout
    (counting sort into one neighbor array), O(V + E); dropped vertices
    are excluded."""
    n = edited.vertex_count
    degree = [0] * (n + 1)
    for t in edited.triples:
        degree[t.src] += 1
        degree[t.tgt] += 1
    offset = [0] * (n + 2)
    for v in range(1, n + 1):
        offset[v + 1] = offset[v] + degree[v]
    neighbors = [0] * offset[n + 1]
    cursor = offset[:]
    for t in edited.triples:
        neighbors[cursor[t.src]] = t.tgt
        cursor[t.src] += 1
        neighbors[cursor[t.tgt]] = t.src
        cursor[t.tgt] += 1
    visited = bytearray(n + 1)
    for v in edited.dropped:
        visited[v] = 1
    components = []
    stack = []
    for start in range(1, n + 1):
        if visited[start]:
            continue
        visited[start] = 1
        stack.append(start)
        members = set()
        while stack:
            v = stack.pop()
            members.add(v)
            for i in range(offset[v], offset[v + 1]):
                w = neighbors[i]
                if not visited[w]:
                    visited[w] = 1
                    stack.append(w)
        components.append(members)
    return components


def apply_copies(components, copy_list, tokens=None):
    """Insert each copy source into the component holding its target.

    Insertion is idempotent.  Copies whose target is in no component
    (i.e. the target word was dropped) are skipped and reported.
    Returns (components, skipped).
    """
    owner = {}
    for ci, comp in enumerate(components):
        for v in comp:
            owner[v] = ci
    skipped = []
    for src, tgt in copy_list:
        if tgt not in owner:
            skipped.append((src, tgt))
            continue
        components[owner[tgt]].add(src)
    return components, skipped


@dataclass
class DecompositionResult:
    """Rendered simple sentences with provenance back to source indices."""

    sentences: list  # of str
    indices: list  # per sentence: source token indices in render order
    periods_appended: list  # per sentence bool
    discarded_components: int = 0
    skipped_copies: list = field(default_factory=list)

    @property
    def token_lists(self):
        return [s.split() for s in self.sentences]


def render_sentences(components, tokens, skipped_copies=()):
    """Sort each component's indices, join surfaces with single spaces,
    discard punctuation-only components, append a period where terminal
    punctuation is missing, and order sentences by their source indices."""
    surfaces = [getattr(t, "surface", t) for t in tokens]
    ordered = sorted(tuple(sorted(c)) for c in components if c)
    sentences = []
    index_lists = []
    appended = []
    discarded = 0
    for comp in ordered:
        words = [surfaces[i - 1] for i in comp]
        if all(_is_punct(w) for w in words):
            discarded += 1
            continue
        if words[-1] in TERMINAL_PUNCT:
            appended.append(False)
        else:
            words.append(".")
            appended.append(True)
        sentences.append(" ".join(words))
        index_lists.append(list(comp))
    return DecompositionResult(sentences=sentences, indices=index_lists,
                               periods_appended=appended,
                               discarded_components=discarded,
                               skipped_copies=list(skipped_copies))


def segment(labeled_graph):
    """Edits -> components -> copies -> rendered sentences."""
    edited = apply_edits(labeled_graph)
    components = find_components(edited)
    components, skipped = apply_copies(components, edited.copies)
    return render_sentences(components, labeled_graph.graph.vertices,
                            skipped_copies=skipped)


def decompose(tokens, parse, model_state):
    """Full inference path for one sentence: graph construction, edit
    prediction, then segmentation."""
    from .model import predict_edits

    graph = build_graph(tokens, parse)
    labeled = predict_edits(graph, model_state)
    return segment(labeled)


def write_decompositions(results, path, separator):
    """One line per input: predicted sentences joined by the corpus
    separator."""
    with open(path, "w", encoding="utf-8") as f:
        for res in results:
            f.write(f" {separator} ".join(res.sentences) + "\n")


def write_provenance(results, path):
    """Side file with per-sentence source-index lists."""
    with open(path, "w", encoding="utf-8") as f:
        for res in results:
            parts = [",".join(str(i) for i in idx) for idx in res.indices]
            f.write(" | ".join(parts) + "\n")
