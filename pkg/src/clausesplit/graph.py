"""Word relation graphs: one vertex per (token, index), edges carrying
adjacency ("ngbh") and/or dependency labels, stored as a triple list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

NEIGHBOR = "ngbh"
UNKNOWN_RELATION = "<unk-rel>"


@dataclass(frozen=True)
class EdgeTriple:
    """(source vertex, target vertex, label set).

    Dependency edges point dependent -> head; when an arc lands on an
    adjacent word pair its label merges onto the adjacency-oriented
    triple, so a pair of vertices is represented exactly once.
    """

    src: int
    tgt: int
    labels: frozenset

    def __post_init__(self):
        if self.src == self.tgt:
            raise ValueError(f"self edge at vertex {self.src}")
        if not self.labels:
            raise ValueError("edge with no labels")
        if NEIGHBOR in self.labels and abs(self.src - self.tgt) != 1:
            raise ValueError(
                f"neighbor label on non-adjacent pair ({self.src}, {self.tgt})")

    @property
    def pair(self):
        return (min(self.src, self.tgt), max(self.src, self.tgt))

    def dependency_only(self):
        return NEIGHBOR not in self.labels


@dataclass(frozen=True)
class WordRelationGraph:
    vertices: tuple  # of Token
    triples: tuple  # of EdgeTriple, sorted by (min, max) vertex pair

    def __len__(self):
        return len(self.vertices)


def build_graph(tokens, parse):
    """Assemble the graph for one sentence.

    Adjacent word pairs (i, i+1) get a neighbor edge; every non-root
    dependency arc becomes an edge oriented dependent -> head.  Labels on
    the same unordered pair merge into a single triple.  The root arc
    itself is not materialized.
    """
    tokens = tuple(tokens)
    n = len(tokens)
    if n == 0:
        raise DataError("cannot build a graph for an empty sentence")

    # unordered pair -> (orientation (src, tgt), label set)
    edges = {}
    for i in range(1, n):
        edges[(i, i + 1)] = ((i, i + 1), {NEIGHBOR})

    for head, dep, rel in parse.arcs:
        if head == 0:
            if rel not in ("root", "ROOT"):
                raise DataError(f"non-root arc {rel!r} attached to index 0")
            continue
        if not (1 <= dep <= n) or not (1 <= head <= n):
            raise DataError(f"arc ({head}, {dep}, {rel}) outside sentence of length {n}")
        if head == dep:
            raise DataError(f"self-referential arc at index {head}")
        pair = (min(head, dep), max(head, dep))
        if pair in edges:
            orient, labels = edges[pair]
            labels.add(rel)
            if NEIGHBOR not in labels and orient != (dep, head):
                # two dependency arcs in opposite directions on one pair
                # (e.g. a relative-clause arc plus a propagated subject):
                # settle on low -> high so the orientation is stable no
                # matter the arc order
                edges[pair] = (pair, labels)
        else:
            edges[pair] = ((dep, head), {rel})

    triples = tuple(
        EdgeTriple(src=orient[0], tgt=orient[1], labels=frozenset(labels))
        for pair, (orient, labels) in sorted(edges.items())
    )
    return WordRelationGraph(vertices=tokens, triples=triples)


@dataclass(frozen=True)
class RelationVocabulary:
    """Relation tag -> one-hot position, with a reserved unknown slot."""

    tags: tuple

    def __len__(self):
        return len(self.tags)

    @property
    def positions(self):
        return {tag: i for i, tag in enumerate(self.tags)}

    def index(self, tag):
        pos = self.positions.get(tag)
        return pos if pos is not None else len(self.tags) - 1

    def encode(self, labels):
        """Position-wise sum of one-hot rows for a label set."""
        row = np.zeros(len(self.tags), dtype=np.float32)
        for label in labels:
            row[self.index(label)] = 1.0
        return row


def relation_vocab(graphs):
    """Collect relation tags from graphs into a stable sorted vocabulary."""
    graphs = list(graphs)
    if not graphs:
        raise DataError("relation_vocab needs at least one graph")
    tags = set()
    for g in graphs:
        for t in g.triples:
            tags.update(t.labels)
    tags.add(NEIGHBOR)
    ordered = sorted(tags) + [UNKNOWN_RELATION]
    return RelationVocabulary(tags=tuple(ordered))


def dump_triples(graph):
    """Debug dump, one line per triple: src, tgt, comma-joined labels."""
    lines = []
    for t in graph.triples:
        lines.append(f"{t.src}\t{t.tgt}\t{','.join(sorted(t.labels))}")
    return "\n".join(lines) + ("\n" if lines else "")
