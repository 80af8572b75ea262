"""Physical-layer likelihoods for replacement candidates.

With the convention L = ln(P(0)/P(1)), the log-likelihood of a candidate bit
pattern c under the channel posterior is

    sum_i  -softplus(-L_i)   where c_i = 0
           -softplus(+L_i)   where c_i = 1

up to a constant that is independent of the candidate (so it cancels in the
Bayesian product).  The argmax over same-length candidates is therefore the
minimizer of the weighted Hamming distance sum(|L_i|) over bits where the
candidate disagrees with the hard decision.

Candidates are restricted to the exact byte length of the received span:
that keeps LLR slices and payload offsets aligned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masker import Vocabulary
from .text_codec import bytes_to_bits


@dataclass(frozen=True)
class PhysScore:
    word: bytes
    log_lik: float


def candidate_set(vocab: Vocabulary, byte_length: int) -> list[bytes]:
    """All vocabulary words of exactly this byte length, lexicographic."""
    if byte_length < 1:
        raise ValueError(f"byte_length must be >= 1, got {byte_length}")
    return list(vocab.by_length.get(byte_length, ()))


def log_phys(word: bytes, llr_slice: np.ndarray) -> float:
    llr_slice = np.asarray(llr_slice, dtype=np.float64)
    if len(llr_slice) != 8 * len(word):
        raise ValueError(f"{len(llr_slice)} LLRs for a {len(word)}-byte word; need 8 per byte")
    bits = bytes_to_bits(word)
    # softplus(x) = log(1 + e^x), computed stably as logaddexp(0, x)
    terms = np.where(bits == 0, -np.logaddexp(0.0, -llr_slice), -np.logaddexp(0.0, llr_slice))
    return float(terms.sum())


def rank_physical(candidates: list[bytes], llr_slice: np.ndarray) -> list[PhysScore]:
    """Descending log-likelihood; ties broken lexicographically ascending."""
    scores = [PhysScore(w, log_phys(w, llr_slice)) for w in candidates]
    scores.sort(key=lambda s: (-s.log_lik, s.word))
    return scores


class CandidateIndex:
    """Per-length candidate lists with cached bit matrices for batch scoring.

    Batch scores use the identity -softplus(L) = -softplus(-L) - L, so the
    whole candidate set costs one matrix product; results agree with
    :func:`log_phys` to floating-point rounding.
    """

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self._cache: dict[int, tuple[list[bytes], np.ndarray]] = {}

    def candidates(self, byte_length: int) -> list[bytes]:
        return self._entry(byte_length)[0]

    def _entry(self, byte_length: int) -> tuple[list[bytes], np.ndarray]:
        entry = self._cache.get(byte_length)
        if entry is None:
            words = candidate_set(self.vocab, byte_length)
            if words:
                matrix = np.unpackbits(
                    np.frombuffer(b"".join(words), dtype=np.uint8).reshape(len(words), byte_length),
                    axis=1,
                ).astype(np.float64)
            else:
                matrix = np.zeros((0, 8 * byte_length))
            entry = (words, matrix)
            self._cache[byte_length] = entry
        return entry

    def score_all(self, llr_slice: np.ndarray) -> tuple[list[bytes], np.ndarray]:
        """Exact log_phys for every candidate matching the slice length."""
        llr_slice = np.asarray(llr_slice, dtype=np.float64)
        if len(llr_slice) % 8 != 0:
            raise ValueError("LLR slice length must be a multiple of 8")
        words, matrix = self._entry(len(llr_slice) // 8)
        if not words:
            return words, np.zeros(0)
        base = -np.logaddexp(0.0, -llr_slice).sum()
        return words, base - matrix @ llr_slice
