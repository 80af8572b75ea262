import math

import pytest

from conftest import TINY, TINY_K, TINY_VSIZE
from lm_service.model import (
    TrigramInfillModel,
    UnsatisfiableError,
    merge_candidate,
)

CTX = ["the", "cat", "<mask>", "on", "the"]


class TestScoring:
    def test_hand_counted_trigram(self, tiny_model):
        # forward context (the, cat) occurs twice: -> sat, -> ate
        # backward context (on, the) occurs once: sat <-
        fwd = math.log((1 + TINY_K) / (2 + TINY_K * TINY_VSIZE))
        bwd = math.log((1 + TINY_K) / (1 + TINY_K * TINY_VSIZE))
        assert tiny_model.word_log_prob(CTX, 2, "sat") == pytest.approx(fwd + bwd)

    def test_unseen_word_gets_smoothed_floor(self, tiny_model):
        fwd = math.log(TINY_K / (2 + TINY_K * TINY_VSIZE))
        bwd = math.log(TINY_K / (1 + TINY_K * TINY_VSIZE))
        assert tiny_model.word_log_prob(CTX, 2, "zzz") == pytest.approx(fwd + bwd)

    def test_unknown_context_is_uniform(self, tiny_model):
        # context words outside the vocabulary fold to the unknown symbol,
        # giving an unseen context: uniform 1/V in both directions
        score = tiny_model.word_log_prob(["qq", "ww", "<mask>", "ee", "rr"], 2, "cat")
        assert score == pytest.approx(2 * math.log(1 / TINY_VSIZE))

    def test_edges_use_padding(self, tiny_model):
        # mask at position 0 of a 1-token sequence: both contexts are pads
        score = tiny_model.word_log_prob(["<mask>"], 0, "the")
        # "the" opens the stream once -> forward count 1 under (<s>, <s>)
        fwd = math.log((1 + TINY_K) / (1 + TINY_K * TINY_VSIZE))
        # (log, </s>) backward context... compute via pads: "log" is last ->
        # backward context (</s>, </s>) counts {"log": 1}
        bwd = math.log(TINY_K / (1 + TINY_K * TINY_VSIZE))
        assert score == pytest.approx(fwd + bwd)

    def test_forced_scoring_descends_and_dedups(self, tiny_model):
        ranked = tiny_model.score_candidates(CTX, 2, ["rat", "sat", "sat", "ate"])
        assert [c.word for c in ranked][0] == "sat"
        assert len(ranked) == 3  # duplicate collapsed, not double-counted
        scores = [c.log_prob for c in ranked]
        assert scores == sorted(scores, reverse=True)
        by_word = {c.word: c.log_prob for c in ranked}
        assert by_word["sat"] == pytest.approx(tiny_model.word_log_prob(CTX, 2, "sat"))

    def test_merge_is_log_sum_exp(self):
        pool = {}
        merge_candidate(pool, "w", math.log(0.25))
        merge_candidate(pool, "w", math.log(0.5))
        assert pool["w"] == pytest.approx(math.log(0.75))


class TestGeneration:
    def test_byte_length_filter_and_order(self, tiny_model):
        out = tiny_model.generate(CTX, 2, byte_length=3, top_k=5)
        assert len(out) == 5
        assert all(len(c.word.encode("utf-8")) == 3 for c in out)
        scores = [c.log_prob for c in out]
        assert scores == sorted(scores, reverse=True)
        assert out[0].word == "sat"  # supported by both directions
        assert out[1].word == "ate"  # supported by forward only

    def test_generated_scores_match_direct_scoring(self, tiny_model):
        for c in tiny_model.generate(CTX, 2, byte_length=3, top_k=10):
            assert c.log_prob == pytest.approx(
                tiny_model.word_log_prob(CTX, 2, c.word), abs=1e-12
            )

    def test_narrow_beam_prunes(self, tiny_model):
        wide = tiny_model.generate(CTX, 2, byte_length=3, top_k=10, beam=8)
        narrow = tiny_model.generate(CTX, 2, byte_length=3, top_k=10, beam=1)
        # beam 1 follows only the heaviest character branch: "s" -> "sat"
        assert [c.word for c in narrow] == ["sat"]
        assert len(wide) > len(narrow)

    def test_no_byte_length_uses_whole_vocabulary(self, tiny_model):
        # beam wider than the number of first-character branches, so
        # nothing is pruned and the whole vocabulary comes back
        out = tiny_model.generate(CTX, 2, byte_length=None, top_k=100, beam=16)
        assert {c.word for c in out} == set(TINY)

    def test_unsatisfiable_length_raises(self, tiny_model):
        with pytest.raises(UnsatisfiableError):
            tiny_model.generate(CTX, 2, byte_length=9, top_k=5)


class TestConstruction:
    def test_empty_stream_rejected(self):
        with pytest.raises(ValueError):
            TrigramInfillModel([])

    def test_bad_smoothing_rejected(self):
        with pytest.raises(ValueError):
            TrigramInfillModel(["a"], k=0.0)

    def test_model_id_describes_training(self, tiny_model):
        assert tiny_model.model_id == f"trigram-infill:{len(TINY)}t:10v:k0.5"
