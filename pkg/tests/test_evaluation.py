import json
import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragmt.evaluation import (
    EvalConfig,
    EvaluationReport,
    brevity_penalty,
    corpus_bleu,
    eval_tokenize,
    modified_precision,
    render_report,
    sentence_bleu,
)

GOLDEN = Path(__file__).parent / "golden"


def reference_bleu(pairs, max_order=4):
    """Brute-force corpus BLEU, written independently of the module under test.

    Counts n-grams by scanning token lists with list.count, folds precisions
    with plain floats, and applies the closed-form brevity penalty.
    """
    def chars(text):
        return [c for c in text if not c.isspace()]

    def grams(tokens, n):
        return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]

    hyp_total = sum(len(chars(h)) for h, _ in pairs)
    ref_total = sum(len(chars(r)) for _, r in pairs)
    log_sum = 0.0
    for n in range(1, max_order + 1):
        clipped = 0
        total = 0
        for hyp, ref in pairs:
            hyp_grams = grams(chars(hyp), n)
            ref_grams = grams(chars(ref), n)
            for gram in set(hyp_grams):
                clipped += min(hyp_grams.count(gram), ref_grams.count(gram))
            total += len(hyp_grams)
        if clipped == 0 or total == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    if hyp_total == 0:
        return 0.0
    penalty = 1.0 if hyp_total >= ref_total else math.exp(1.0 - ref_total / hyp_total)
    return penalty * math.exp(log_sum / max_order)


class TestTokenize:
    def test_character_mode(self):
        assert eval_tokenize("若好，世界") == ["若", "好", "，", "世", "界"]

    def test_character_mode_drops_whitespace(self):
        assert eval_tokenize("a b") == ["a", "b"]
        assert eval_tokenize("a　b\n") == ["a", "b"]

    def test_whitespace_mode(self):
        assert eval_tokenize("hello world", mode="whitespace") == ["hello", "world"]


class TestModifiedPrecision:
    def test_clipping(self):
        clipped, total = modified_precision([list("ABAB")], [list("AB")], 1)
        assert (clipped, total) == (2, 4)

    def test_identity(self):
        for n in (1, 2, 3):
            clipped, total = modified_precision([list("ABC")], [list("ABC")], n)
            assert clipped == total > 0

    def test_candidate_shorter_than_n(self):
        assert modified_precision([list("AB")], [list("ABCD")], 3) == (0, 0)

    def test_misaligned_lists(self):
        with pytest.raises(ValueError):
            modified_precision([["a"]], [], 1)

    def test_corpus_sums_over_sentences(self):
        clipped, total = modified_precision(
            [list("AB"), list("CD")], [list("AB"), list("CE")], 1
        )
        assert (clipped, total) == (3, 4)


class TestBrevityPenalty:
    def test_equal_lengths(self):
        assert brevity_penalty(10, 10) == 1.0

    def test_short_candidate(self):
        assert brevity_penalty(5, 10) == pytest.approx(math.exp(-1.0), abs=1e-9)

    def test_empty_candidate(self):
        assert brevity_penalty(0, 10) == 0.0

    def test_long_candidate_uncapped(self):
        assert brevity_penalty(20, 10) == 1.0


class TestCorpusBleu:
    def test_identity(self):
        score = corpus_bleu([("若好，世界事", "若好，世界事"), ("承蒙你", "承蒙你")])
        assert score.score == 1.0

    def test_zero_fourgram_zeroes_the_score(self):
        result = corpus_bleu([("ABCD", "ABCE")])
        assert result.precisions == [3 / 4, 2 / 3, 1 / 2, 0.0]
        assert result.score == 0.0

    def test_hand_computed_fixture(self):
        result = corpus_bleu([("ABCDE", "ABCDF")])
        assert result.precisions == [4 / 5, 3 / 4, 2 / 3, 1 / 2]
        assert result.brevity_penalty == 1.0
        assert result.score == pytest.approx(0.2 ** 0.25, abs=1e-12)
        assert round(result.score, 5) == 0.66874

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            corpus_bleu([])

    def test_matches_brute_force_on_random_corpora(self):
        rng = random.Random(1234)
        alphabet = "甲乙丙丁。"
        for _ in range(50):
            pairs = [
                (
                    "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12))),
                    "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12))),
                )
                for _ in range(rng.randint(1, 5))
            ]
            got = corpus_bleu(pairs).score
            want = reference_bleu(pairs)
            assert got == pytest.approx(want, abs=1e-9), pairs

    def test_permutation_invariance(self):
        pairs = [("甲乙丙丁", "甲乙丙戊"), ("乙丙", "乙丙"), ("丁甲乙丙丁", "丁甲乙丁丙")]
        base = corpus_bleu(pairs).score
        rng = random.Random(5)
        for _ in range(10):
            shuffled = pairs[:]
            rng.shuffle(shuffled)
            assert corpus_bleu(shuffled).score == pytest.approx(base, abs=1e-12)


class TestSentenceBleu:
    def test_identity(self):
        assert sentence_bleu("若好，世界事", "若好，世界事") == 1.0

    def test_smoothing_recovers_zero_fourgram(self):
        # p4 numerator substitutes 1: (3/4 * 2/3 * 1/2 * 1/1)^(1/4)
        score = sentence_bleu("ABCE", "ABCD")
        assert score == pytest.approx((3 / 4 * 2 / 3 * 1 / 2) ** 0.25, abs=1e-12)
        assert score > 0.0

    def test_no_smoothing_gives_zero(self):
        config = EvalConfig(sentence_smoothing=False)
        assert sentence_bleu("ABCE", "ABCD", config) == 0.0

    def test_empty_hypothesis(self):
        assert sentence_bleu("", "ABCD") == 0.0

    def test_unigram_miss_stays_zero_even_smoothed(self):
        assert sentence_bleu("XY", "AB") == 0.0


class TestProperties:
    def test_range_randomized(self):
        rng = random.Random(77)
        alphabet = "甲乙丙, a"
        for _ in range(300):
            pairs = [
                (
                    "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 10))),
                    "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 10))),
                )
                for _ in range(rng.randint(1, 4))
            ]
            result = corpus_bleu(pairs)
            assert 0.0 <= result.score <= 1.0
            assert 0.0 <= result.brevity_penalty <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.text(min_size=4, max_size=12), min_size=1, max_size=5))
    def test_identity_property(self, sentences):
        pairs = [(s, s) for s in sentences]
        tokenized_ok = all(len(eval_tokenize(s)) >= 4 for s in sentences)
        result = corpus_bleu(pairs)
        if tokenized_ok:
            assert result.score == 1.0
        assert 0.0 <= result.score <= 1.0

    def test_monotone_clipping(self):
        # repeating a candidate token beyond the reference count adds no matches
        base_clipped, _ = modified_precision([list("AAB")], [list("AB")], 1)
        more_clipped, _ = modified_precision([list("AAAAB")], [list("AB")], 1)
        assert more_clipped == base_clipped == 2


class TestRenderReport:
    def test_seven_model_table_golden(self):
        scores = {
            "Model 0": 0.18,
            "Model 0a": 0.12,
            "Model 1": 0.24,
            "Model 2": 0.21,
            "Model 3": 0.26,
            "Model 3a": 0.17,
            "Model 4": 0.31,
        }
        workflows = {
            "Model 0": "Baseline with Gemini 2.0",
            "Model 0a": "Baseline with ChatGPT 4.0",
            "Model 1": "Dictionary-Based Machine Translation",
            "Model 2": "GPT-4 with Retrieval-Augmented Generation",
            "Model 3": "Dictionary-Based + Gemini 2.0 Refinement",
            "Model 3a": "Dictionary-Based + ChatGPT 4.0 Refinement",
            "Model 4": "Integrated Gemini 2.0 + RAG",
        }
        table = render_report(scores, workflows)
        assert (table + "\n").encode("utf-8") == (GOLDEN / "table_seven_models.txt").read_bytes()
        bleu_column = [line.split("|")[-1].strip() for line in table.splitlines()[2:]]
        assert bleu_column == ["0.18", "0.12", "0.24", "0.21", "0.26", "0.17", "0.31"]

    def test_empty_scores_render_header_only(self):
        table = render_report({})
        lines = table.splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("Models")

    def test_single_row(self):
        table = render_report({"Model 4": 0.31})
        assert table.splitlines()[-1].startswith("Model 4")


class TestEvaluationReport:
    def test_aggregates_per_label(self):
        report = EvaluationReport()
        pairs = [("若好", "若好"), ("承蒙你", "承蒙汝")]
        report.add("demo", pairs, EvalConfig(), workflow="Demo Workflow")
        assert set(report.corpus_bleu) == {"demo"}
        assert len(report.sentence_bleu["demo"]) == 2
        assert len(report.ngram_precisions["demo"]) == 4
        assert report.counts["demo"]["candidate_tokens"] == 5
        assert report.counts["demo"]["reference_tokens"] == 5
        parsed = json.loads(report.to_json())
        assert set(parsed) == {"corpus_bleu", "sentence_bleu", "ngram_precisions", "brevity_penalty", "counts"}
