"""
Tests for BLEU, chrF2++, signatures and score formatting.
"""

import random
from decimal import Decimal

import pytest

from src.errors import ConfigError, EmptyCorpus, LengthMismatch
from src.metrics import (
    Metric,
    MetricSignature,
    Smoothing,
    bleu,
    bleu_from_statistics,
    chrf_pp,
    chrf_segment_statistics,
    chrf_words,
    round_half_up,
)
from src.ter import ter

REFS = [
    "The guards at the gate will not let you pass.",
    "Bring me the amulet and I will reward you.",
    "Dragons have returned to the land of Skyrim.",
    "You should speak to the Jarl about this matter.",
]


class TestSignatures:
    def test_defaults(self):
        assert MetricSignature.default(Metric.BLEU).format() == "#:1|c:mixed|e:no|tok:13a|s:exp|v:2.0.0"
        assert MetricSignature.default(Metric.CHRF2PP).format() == "#:1|c:mixed|e:yes|nc:6|nw:2|s:no|v:2.0.0"
        assert MetricSignature.default(Metric.TER).format() == "#:1|c:lc|t:tercom|nr:no|pn:yes|a:no|v:2.0.0"

    def test_names(self):
        assert MetricSignature.default(Metric.CHRF2PP).name == "chrF2++"
        assert MetricSignature.default(Metric.BLEU).name == "BLEU"

    def test_overrides(self):
        sig = MetricSignature.default(Metric.TER).with_overrides({"normalized": True, "case": "mixed"})
        assert sig.format() == "#:1|c:mixed|t:tercom|nr:yes|pn:yes|a:no|v:2.0.0"

    def test_chrf_effective_order_override(self):
        sig = MetricSignature.default(Metric.CHRF2PP).with_overrides({"effective_order": False})
        assert sig.smoothing is Smoothing.EPS
        assert not sig.effective_order
        assert "e:no" in sig.format()

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            MetricSignature.default(Metric.BLEU).with_overrides({"tokenise": "intl"})

    def test_smoothing_must_suit_the_metric(self):
        with pytest.raises(ConfigError):
            MetricSignature.default(Metric.BLEU).with_overrides({"smoothing": "eps"})

    def test_single_reference_only(self):
        with pytest.raises(ConfigError):
            MetricSignature.default(Metric.BLEU).with_overrides({"n_refs": 2})


class TestRounding:
    def test_half_up(self):
        assert round_half_up(2.675) == Decimal("2.68")
        assert round_half_up(37.145) == Decimal("37.15")
        assert round_half_up(100.0) == Decimal("100.00")


class TestBleu:
    def test_identity(self):
        result = bleu(REFS, REFS)
        assert result.rounded == Decimal("100.00")
        assert result.format() == "BLEU|#:1|c:mixed|e:no|tok:13a|s:exp|v:2.0.0 = 100.00"

    def test_nothing_matches(self):
        assert bleu(["zzz yyy xxx www"], ["The guards at the gate"]).score == 0.0

    def test_corpus_without_four_grams_scores_zero(self):
        assert bleu(["Hello there"], ["Hello there"]).score == 0.0

    def test_brevity_penalty(self):
        result = bleu(["The guards at the gate"], [REFS[0]])
        assert result.details["bp"] < 1.0
        assert result.details["precisions"][0] == 100.0

    def test_exp_equals_none_when_all_precisions_nonzero(self):
        stats = [10, 10, 9, 7, 5, 3, 10, 9, 8, 7]
        assert bleu_from_statistics(stats, Smoothing.EXP)["score"] == bleu_from_statistics(stats, Smoothing.NONE)["score"]

    def test_exp_smoothing_of_missing_order(self):
        stats = [5, 5, 3, 1, 0, 0, 5, 4, 3, 2]
        precisions = bleu_from_statistics(stats, Smoothing.EXP)["precisions"]
        assert precisions[2] == pytest.approx(100.0 / (2 * 3))
        assert precisions[3] == pytest.approx(100.0 / (4 * 2))

    def test_permutation_invariant(self):
        hyps = ["The guards will not let you pass.", "Bring the amulet to me.",
                "Dragons are back in Skyrim.", "Speak with the Jarl."]
        order = [2, 0, 3, 1]
        assert bleu(hyps, REFS).score == bleu([hyps[i] for i in order], [REFS[i] for i in order]).score

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            bleu(["a"], ["a", "b"])

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            bleu([], [])

    def test_parallel_statistics_match(self):
        rng = random.Random(5)
        vocab = "the a dragon guard sword shield gold door open close".split()
        refs = [" ".join(rng.choices(vocab, k=rng.randint(4, 12))) for _ in range(2500)]
        hyps = [" ".join(rng.choices(vocab, k=rng.randint(4, 12))) for _ in range(2500)]
        assert bleu(hyps, refs, workers=2).score == bleu(hyps, refs, workers=1).score


class TestChrf:
    def test_identity(self):
        assert chrf_pp(REFS, REFS).rounded == Decimal("100.00")

    def test_effective_order_average(self):
        assert chrf_pp(["abcd"], ["abce"]).rounded == Decimal("38.33")

    def test_eps_smoothing(self):
        sig = MetricSignature.default(Metric.CHRF2PP).with_overrides({"effective_order": False})
        assert chrf_pp(["abcd"], ["abce"], sig).rounded == Decimal("23.96")

    def test_word_splitting(self):
        assert chrf_words("Hello, (world) ! a?") == ["Hello", ",", "(world", ")", "!", "a", "?"]

    def test_case_matters_by_default(self):
        assert chrf_pp(["the dragon"], ["The Dragon"]).score < 100.0
        sig = MetricSignature.default(Metric.CHRF2PP).with_overrides({"case": "lower"})
        assert chrf_pp(["the dragon"], ["The Dragon"], sig).rounded == Decimal("100.00")

    def test_orders_missing_from_the_reference_drop_hypothesis_counts(self):
        stats = chrf_segment_statistics("the sword", "it", 6, 2)
        assert stats == [8, 2, 1, 7, 1, 0] + [0, 0, 0] * 4 + [2, 1, 0, 0, 0, 0]

    def test_short_reference_does_not_dilute_corpus_precision(self):
        score = chrf_pp(["the sword", "the sword"], ["it", "the sword"])
        assert score.rounded == Decimal("90.59")


class TestIdentityExtremes:
    def test_random_corpora_score_perfectly_against_themselves(self):
        rng = random.Random(42)
        vocab = ["the", "Dragon", "l'\u00e9p\u00e9e", "{0}", "<b>", ",", ".", "?", "3.50", "Whiterun", "o\u00f9", "jarl"]
        for _ in range(100):
            corpus = [" ".join(rng.choices(vocab, k=rng.randint(4, 40))) for _ in range(rng.randint(1, 8))]
            assert bleu(corpus, corpus).rounded == Decimal("100.00")
            assert chrf_pp(corpus, corpus).rounded == Decimal("100.00")
            score, _ = ter(corpus, corpus)
            assert score.rounded == Decimal("0.00")
