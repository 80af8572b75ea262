import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clsec.text_codec import DELIMITER, TokenSpan, bits_to_bytes, bytes_to_bits, tokenize


class TestBits:
    def test_msb_first(self):
        assert bytes_to_bits(b"\x80").tolist() == [1, 0, 0, 0, 0, 0, 0, 0]
        assert bytes_to_bits(b"\x01").tolist() == [0, 0, 0, 0, 0, 0, 0, 1]
        assert bytes_to_bits(b"\xa5").tolist() == [1, 0, 1, 0, 0, 1, 0, 1]

    def test_empty(self):
        assert bytes_to_bits(b"").size == 0
        assert bits_to_bytes(np.zeros(0, dtype=np.uint8)) == b""

    @given(st.binary(max_size=200))
    def test_round_trip(self, payload):
        assert bits_to_bytes(bytes_to_bits(payload)) == payload

    def test_partial_byte_rejected(self):
        with pytest.raises(ValueError):
            bits_to_bytes(np.array([1, 0, 1], dtype=np.uint8))


WORDS = st.text(alphabet=st.characters(min_codepoint=97, max_codepoint=122), min_size=1, max_size=8)


class TestTokenize:
    def test_empty(self):
        assert tokenize(b"") == ([], 0)

    def test_single_word(self):
        spans, skipped = tokenize(b"cat")
        assert spans == [TokenSpan(b"cat", 0, 3)]
        assert skipped == 0

    def test_delimiter_runs_are_skipped_segments(self):
        spans, skipped = tokenize(b" a  bc ")
        assert [s.data for s in spans] == [b"a", b"bc"]
        # leading, the empty middle, and trailing
        assert skipped == 3

    def test_offsets(self):
        payload = b"the cat sat"
        spans, _ = tokenize(payload)
        assert [(s.start, s.end) for s in spans] == [(0, 3), (4, 7), (8, 11)]
        for s in spans:
            assert payload[s.start : s.end] == s.data

    def test_non_space_whitespace_is_not_a_delimiter(self):
        spans, skipped = tokenize(b"a\tb")
        assert [s.data for s in spans] == [b"a\tb"]
        assert skipped == 0

    @given(st.lists(WORDS, min_size=1, max_size=12))
    def test_reconstruction(self, words):
        payload = " ".join(words).encode("ascii")
        spans, skipped = tokenize(payload)
        assert [s.data.decode() for s in spans] == words
        assert skipped == 0
        rebuilt = bytearray(b" " * len(payload))
        for s in spans:
            rebuilt[s.start : s.end] = s.data
        assert bytes(rebuilt) == payload

    @given(st.binary(max_size=64))
    def test_spans_cover_exactly_the_non_delimiter_bytes(self, payload):
        spans, skipped = tokenize(payload)
        covered = set()
        for s in spans:
            assert s.data == payload[s.start : s.end]
            assert DELIMITER not in s.data
            covered.update(range(s.start, s.end))
        outside = [i for i in range(len(payload)) if i not in covered]
        assert all(payload[i] == DELIMITER for i in outside)
