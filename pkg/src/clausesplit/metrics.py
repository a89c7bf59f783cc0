"""Evaluation: per-class edit F1 with confusion tables, sentence-count
match rate, aligned per-example BLEU-4, and length statistics.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .supervision import LABELS

BLEU_EPS = 0.1
BLEU_MAX_N = 4


@dataclass
class EditReport:
    precision: dict
    recall: dict
    f1: dict
    support: dict
    micro_f1: float
    macro_f1: float
    confusion: np.ndarray  # 4x4, rows gold, row-normalized percentages
    undefined_classes: tuple  # classes with zero gold and zero predictions
    empty_gold_rows: tuple  # classes that never occur as gold


def edit_f1(gold_labels, pred_labels):
    """Per-class precision/recall/F1 over A/B/C/D plus micro and macro
    aggregates (the aggregate convention differs between reports, so both
    are included)."""
    gold = list(gold_labels)
    pred = list(pred_labels)
    if not gold:
        raise ValueError("edit_f1 needs at least one label")
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")

    precision, recall, f1, support = {}, {}, {}, {}
    undefined = []
    correct_total = 0
    for cls in LABELS:
        tp = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, pred) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, pred) if g == cls and p != cls)
        support[cls] = tp + fn
        if tp + fp + fn == 0:
            undefined.append(cls)
        precision[cls] = tp / (tp + fp) if tp + fp else 0.0
        recall[cls] = tp / (tp + fn) if tp + fn else 0.0
        denom = precision[cls] + recall[cls]
        f1[cls] = 2 * precision[cls] * recall[cls] / denom if denom else 0.0
        correct_total += tp
    # single-label classification: micro-F1 equals accuracy
    micro = correct_total / len(gold)
    macro = sum(f1.values()) / len(LABELS)
    return EditReport(precision=precision, recall=recall, f1=f1, support=support,
                      micro_f1=micro, macro_f1=macro,
                      confusion=confusion(gold, pred),
                      undefined_classes=tuple(undefined),
                      empty_gold_rows=tuple(c for c in LABELS if support[c] == 0))


def confusion(gold_labels, pred_labels):
    """Row-normalized percentages: row g, column p is the share of gold-g
    triples predicted p.  Rows with no gold instances stay all-zero."""
    gold = list(gold_labels)
    pred = list(pred_labels)
    if not gold:
        raise ValueError("confusion needs at least one label")
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    pos = {lab: i for i, lab in enumerate(LABELS)}
    counts = np.zeros((4, 4), dtype=np.float64)
    for g, p in zip(gold, pred):
        counts[pos[g], pos[p]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(totals > 0, 100.0 * counts / totals, 0.0)
    return rows


def match_ss(gold_outputs, pred_outputs):
    """True iff the predicted sentence count equals the gold count."""
    return len(gold_outputs) == len(pred_outputs)


def _ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu4(candidate_tokens, reference_tokens, eps=BLEU_EPS, max_n=BLEU_MAX_N):
    """Sentence BLEU against a single reference.

    Geometric mean of modified n-gram precisions for n = 1..4; orders with
    zero matches fall back to eps over the candidate n-gram count, because
    short simple sentences hit empty 4-gram overlaps constantly.  Brevity
    penalty exp(1 - r/c) applies when the candidate is shorter.
    """
    cand = list(candidate_tokens)
    ref = list(reference_tokens)
    if not cand:
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        cand_counts = Counter(_ngrams(cand, n))
        total = sum(cand_counts.values())
        if total == 0:
            continue  # candidate too short for this order; not a zero match
        ref_counts = Counter(_ngrams(ref, n))
        clipped = sum(min(count, ref_counts[ng]) for ng, count in cand_counts.items())
        logs.append(math.log(clipped / total if clipped > 0 else eps / total))
    score = math.exp(sum(logs) / len(logs))
    c, r = len(cand), len(ref)
    if c < r:
        score *= math.exp(1.0 - r / c)
    return score


def example_score(gold_sentences, pred_sentences, assignment="greedy"):
    """Align gold and predicted sentences one-to-one and average BLEU-4.

    Pairs are taken greedily in descending pairwise BLEU (or via optimal
    assignment with assignment="optimal" for sensitivity checks).  Every
    unmatched sentence on either side adds 0 to the numerator and 1 to
    the denominator.
    """
    gold = [list(s) for s in gold_sentences]
    pred = [list(s) for s in pred_sentences]
    if not gold and not pred:
        return 1.0
    if not gold or not pred:
        return 0.0
    scores = np.zeros((len(gold), len(pred)))
    for i, g in enumerate(gold):
        for j, p in enumerate(pred):
            scores[i, j] = bleu4(p, g)
    matched = []
    if assignment == "optimal":
        from scipy.optimize import linear_sum_assignment

        rows, cols = linear_sum_assignment(-scores)
        matched = list(zip(rows.tolist(), cols.tolist()))
    elif assignment == "greedy":
        order = sorted(
            ((i, j) for i in range(len(gold)) for j in range(len(pred))),
            key=lambda ij: (-scores[ij], ij),
        )
        used_g, used_p = set(), set()
        for i, j in order:
            if i in used_g or j in used_p:
                continue
            used_g.add(i)
            used_p.add(j)
            matched.append((i, j))
    else:
        raise ValueError(f"unknown assignment {assignment!r}")
    numerator = sum(scores[i, j] for i, j in matched)
    denominator = len(matched) + (len(gold) - len(matched)) + (len(pred) - len(matched))
    return numerator / denominator


@dataclass
class ExampleRecord:
    example_id: str
    n_gold: int
    n_pred: int
    match: bool
    bleu: float


@dataclass
class DecompositionReport:
    match_ss_pct: float
    tokens_per_sentence: float
    bleu: float  # mean per-example aligned BLEU-4, in [0, 1]
    records: list = field(default_factory=list)
    bertscore: float | None = None  # slot for externally computed values

    def __str__(self):
        lines = [
            f"examples: {len(self.records)}",
            f"match_ss_pct: {self.match_ss_pct:.2f}",
            f"tokens_per_sentence: {self.tokens_per_sentence:.2f}",
            f"bleu4: {100.0 * self.bleu:.2f}",
        ]
        if self.bertscore is not None:
            lines.append(f"bertscore: {self.bertscore:.2f}")
        return "\n".join(lines)


def corpus_report(examples, predictions, assignment="greedy", workers=None):
    """Aggregate Match#SS, tokens per output sentence, and the aligned
    BLEU average over (example, prediction) pairs.

    ``examples`` supplies ids and gold outputs; ``predictions`` is one
    list of token lists per example.  Scoring is pure per example, so it
    fans out across worker threads when asked to.
    """
    examples = list(examples)
    predictions = [[list(s) for s in p] for p in predictions]
    if len(examples) != len(predictions):
        raise ValueError(
            f"{len(examples)} examples but {len(predictions)} predictions")

    def score(pair):
        ex, pred = pair
        gold = [list(s) for s in ex.gold_outputs]
        return ExampleRecord(
            example_id=ex.id,
            n_gold=len(gold),
            n_pred=len(pred),
            match=match_ss(gold, pred),
            bleu=example_score(gold, pred, assignment=assignment),
        )

    pairs = list(zip(examples, predictions))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(score, pairs))
    else:
        records = [score(p) for p in pairs]

    n_sentences = sum(r.n_pred for r in records)
    n_tokens = sum(len(s) for pred in predictions for s in pred)
    return DecompositionReport(
        match_ss_pct=100.0 * sum(r.match for r in records) / len(records),
        tokens_per_sentence=(n_tokens / n_sentences) if n_sentences else 0.0,
        bleu=sum(r.bleu for r in records) / len(records),
        records=records,
    )


def write_example_records(report, path):
    """Machine-readable per-example lines (JSON per line)."""
    with open(path, "w", encoding="utf-8") as f:
        for r in report.records:
            f.write(json.dumps({
                "id": r.example_id,
                "n_gold": r.n_gold,
                "n_pred": r.n_pred,
                "match": r.match,
                "bleu": round(r.bleu, 6),
            }) + "\n")
