"""Metric tests: per-class F1, confusion rows, Match#SS, BLEU-4 with its
hand-computed cases, and the aligned per-example score."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clausesplit.corpus import Example, tokens_from_words
from clausesplit.metrics import (bleu4, confusion, corpus_report, edit_f1,
                                 example_score, match_ss,
                                 write_example_records)


class TestEditF1:
    def test_perfect_predictions(self):
        report = edit_f1(list("AABBCCDD"), list("AABBCCDD"))
        assert all(report.f1[c] == 1.0 for c in "ABCD")
        assert report.micro_f1 == 1.0 and report.macro_f1 == 1.0

    def test_hand_counted_case(self):
        report = edit_f1(["A", "A", "B", "D"], ["A", "B", "B", "D"])
        assert report.precision["A"] == 1.0
        assert report.recall["A"] == 0.5
        assert report.f1["A"] == pytest.approx(2 / 3)
        assert report.f1["B"] == pytest.approx(2 / 3)
        assert report.f1["D"] == 1.0
        assert report.f1["C"] == 0.0
        assert "C" in report.undefined_classes

    def test_micro_f1_equals_accuracy(self):
        rng = np.random.default_rng(0)
        gold = [("ABCD")[i] for i in rng.integers(0, 4, 200)]
        pred = [("ABCD")[i] for i in rng.integers(0, 4, 200)]
        report = edit_f1(gold, pred)
        accuracy = sum(g == p for g, p in zip(gold, pred)) / len(gold)
        assert report.micro_f1 == pytest.approx(accuracy)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            edit_f1([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            edit_f1(["A"], ["A", "B"])


class TestConfusion:
    def test_identity_predictions_are_diagonal(self):
        rows = confusion(list("ABCDABCD"), list("ABCDABCD"))
        np.testing.assert_allclose(np.diag(rows), [100.0] * 4)

    def test_hand_counted_row(self):
        rows = confusion(["B", "B"], ["A", "B"])
        np.testing.assert_allclose(rows[1], [50.0, 50.0, 0.0, 0.0])

    def test_rows_sum_to_hundred_or_zero(self):
        rng = np.random.default_rng(1)
        gold = [("ABD")[i] for i in rng.integers(0, 3, 100)]  # no gold C
        pred = [("ABCD")[i] for i in rng.integers(0, 4, 100)]
        rows = confusion(gold, pred)
        sums = rows.sum(axis=1)
        for cls, total in zip("ABCD", sums):
            assert total == pytest.approx(100.0 if cls != "C" else 0.0, abs=0.01)

    def test_absent_gold_class_flagged(self):
        report = edit_f1(["A", "A"], ["A", "B"])
        assert "C" in report.empty_gold_rows and "D" in report.empty_gold_rows


class TestMatchSS:
    def test_equal_counts_match(self):
        assert match_ss([["a"], ["b"]], [["x"], ["y"]])

    def test_unequal_counts_do_not(self):
        assert not match_ss([["a"]], [["x"], ["y"], ["z"]])


class TestBleu4:
    def test_identical_sequences_score_one(self):
        tokens = "the quick brown fox jumps".split()
        assert bleu4(tokens, tokens) == pytest.approx(1.0)

    def test_hand_arithmetic_with_smoothing(self):
        # p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = 0.1/1, brevity penalty 1
        expected = (0.75 * (2 / 3) * 0.5 * 0.1) ** 0.25
        got = bleu4("a b c d".split(), "a b c e".split())
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(0.3976, abs=5e-5)

    def test_short_identical_candidate_still_scores_one(self):
        # orders the candidate cannot populate are skipped, not smoothed
        assert bleu4(["a", "b", "."], ["a", "b", "."]) == pytest.approx(1.0)

    def test_brevity_penalty_formula(self):
        # candidate length 2 vs reference length 4: BP = exp(1 - 4/2);
        # both populated orders have full precision, so BP is the score
        with_bp = bleu4(["a", "b"], ["a", "b", "c", "d"])
        assert with_bp == pytest.approx(math.exp(-1.0), rel=1e-9)

    def test_empty_candidate_scores_zero(self):
        assert bleu4([], ["a"]) == 0.0

    def test_repeating_a_matched_token_cannot_beat_clipping(self):
        # modified precision clips repeated candidate tokens at the
        # reference count, so padding with duplicates never helps
        reference = "the cat sat".split()
        once = bleu4(["the", "cat"], reference)
        spammed = bleu4(["the", "the", "the", "cat"], reference)
        assert spammed < once

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8),
           st.lists(st.sampled_from("abcd"), min_size=1, max_size=8))
    def test_score_bounds(self, cand, ref):
        assert 0.0 <= bleu4(cand, ref) <= 1.0


class TestExampleScore:
    def test_identical_sets_score_one(self):
        gold = [["a", "b", "."], ["c", "d", "."]]
        assert example_score(gold, [list(s) for s in gold]) == pytest.approx(1.0)

    def test_unmatched_rule_gives_half(self):
        gold = [["a", "b", "."], ["c", "d", "."]]
        pred = [["a", "b", "."]]
        assert example_score(gold, pred) == pytest.approx(0.5)

    def test_greedy_matching_trace(self):
        g1 = "the tall man left today".split()
        g2 = "a dog barked".split()
        p1 = "the tall man left".split()  # close to g1
        p2 = "a cat barked".split()       # close to g2
        direct = (bleu4(p1, g1) + bleu4(p2, g2)) / 2
        cross = (bleu4(p2, g1) + bleu4(p1, g2)) / 2
        assert direct > cross  # greedy must take the direct pairing
        assert example_score([g1, g2], [p1, p2]) == pytest.approx(direct)

    def test_spurious_prediction_strictly_decreases_score(self):
        gold = [["a", "b", "c", "."]]
        pred = [["a", "b", "c", "."]]
        with_extra = pred + [["z", "z", "."]]
        assert example_score(gold, with_extra) < example_score(gold, pred)

    def test_optimal_assignment_at_least_greedy(self):
        gold = [["a", "b", "c"], ["b", "c", "d"]]
        pred = [["b", "c", "d"], ["a", "b", "x"]]
        greedy = example_score(gold, pred, assignment="greedy")
        optimal = example_score(gold, pred, assignment="optimal")
        assert optimal >= greedy - 1e-12


def _example(i, gold_sentences):
    source = [t for s in gold_sentences for t in s]
    return Example(id=str(i), source=tokens_from_words(source),
                   gold_outputs=tuple(tuple(s) for s in gold_sentences))


class TestCorpusReport:
    def test_single_perfect_example(self):
        ex = _example(1, [["a", "b", "."], ["c", "d", "."]])
        report = corpus_report([ex], [[["a", "b", "."], ["c", "d", "."]]])
        assert report.match_ss_pct == 100.0
        assert report.bleu == pytest.approx(1.0)

    def test_tokens_per_sentence_hand_count(self):
        ex = _example(1, [["x", "."]])
        report = corpus_report([ex], [[["a", "b", "."], ["c", "."]]])
        assert report.tokens_per_sentence == pytest.approx(2.5)

    def test_mismatched_lengths_rejected(self):
        ex = _example(1, [["x", "."]])
        with pytest.raises(ValueError):
            corpus_report([ex], [])

    def test_threaded_scoring_matches_serial(self):
        examples = [_example(i, [["a", "b", "."], ["c", str(i), "."]])
                    for i in range(8)]
        preds = [[["a", "b", "."]] for _ in range(8)]
        serial = corpus_report(examples, preds)
        threaded = corpus_report(examples, preds, workers=4)
        assert serial.bleu == pytest.approx(threaded.bleu)
        assert [r.match for r in serial.records] == [r.match for r in threaded.records]

    def test_per_example_records_file(self, tmp_path):
        import json

        ex = _example(1, [["a", "b", "."]])
        report = corpus_report([ex], [[["a", "b", "."]]])
        out = tmp_path / "records.jsonl"
        write_example_records(report, out)
        row = json.loads(out.read_text().splitlines()[0])
        assert row["id"] == "1" and row["match"] is True
