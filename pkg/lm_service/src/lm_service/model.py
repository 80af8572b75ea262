"""Span-infilling model: bidirectional trigram scores, trie-beam decoding.

The context encoder is deliberately small: the two words on each side of
the masked position (with padding at sentence edges, and any other masked
or unknown position folded to a single unknown symbol).  The decoder
emits the masked word one character at a time over the trie of known
words, with beam pruning (default width 8) and an explicit word-boundary
event closing each hypothesis.

Per-step log-probabilities telescope: the probability of emitting prefix
``c1..ci`` is the total context-conditional mass of words starting with
that prefix, so

    sum of character log-probs + boundary log-prob  =  log P(word | context)

exactly.  Hypotheses that reach the same surface form are merged by
log-sum-exp.  Scores are unnormalized (a constant per context cancels
downstream), finite, and comparable within one response.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

MASK = "<mask>"
UNK = "<unk>"
PAD_LEFT = "<s>"
PAD_RIGHT = "</s>"

DEFAULT_K = 0.01
DEFAULT_BEAM = 8


class UnsatisfiableError(Exception):
    """No known word can satisfy the request's constraints."""


@dataclass(frozen=True)
class Candidate:
    word: str
    log_prob: float


def merge_candidate(pool: dict[str, float], word: str, log_prob: float) -> None:
    """Insert a hypothesis, merging duplicates by log-sum-exp."""
    if word in pool:
        a, b = pool[word], log_prob
        hi, lo = (a, b) if a >= b else (b, a)
        pool[word] = hi + math.log1p(math.exp(lo - hi))
    else:
        pool[word] = log_prob


class TrigramInfillModel:
    """Add-k smoothed forward+backward trigram counts over a word stream."""

    def __init__(self, words: Sequence[str], k: float = DEFAULT_K):
        if not words:
            raise ValueError("training stream is empty")
        if k <= 0:
            raise ValueError("smoothing constant must be positive")
        self.k = k
        self.vocab = frozenset(words)
        self.forward: dict[tuple[str, str], Counter] = {}
        self.backward: dict[tuple[str, str], Counter] = {}
        n = len(words)
        for i, w in enumerate(words):
            fctx = (
                words[i - 2] if i >= 2 else PAD_LEFT,
                words[i - 1] if i >= 1 else PAD_LEFT,
            )
            bctx = (
                words[i + 1] if i + 1 < n else PAD_RIGHT,
                words[i + 2] if i + 2 < n else PAD_RIGHT,
            )
            self.forward.setdefault(fctx, Counter())[w] += 1
            self.backward.setdefault(bctx, Counter())[w] += 1
        self.forward_totals = {c: sum(v.values()) for c, v in self.forward.items()}
        self.backward_totals = {c: sum(v.values()) for c, v in self.backward.items()}
        self.by_byte_length: dict[int, list[str]] = {}
        for w in sorted(self.vocab):
            self.by_byte_length.setdefault(len(w.encode("utf-8")), []).append(w)
        self.model_id = f"trigram-infill:{n}t:{len(self.vocab)}v:k{k:g}"

    # -- scoring ------------------------------------------------------------

    @property
    def _vocab_size(self) -> int:
        return len(self.vocab) + 1  # unknown symbol is scoreable

    def _map(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def _contexts(
        self, tokens: Sequence[str], mask_index: int
    ) -> tuple[tuple[str, str], tuple[str, str]]:
        def at(pos: int, pad: str) -> str:
            if pos < 0 or pos >= len(tokens):
                return pad
            return self._map(tokens[pos])

        fctx = (at(mask_index - 2, PAD_LEFT), at(mask_index - 1, PAD_LEFT))
        bctx = (at(mask_index + 1, PAD_RIGHT), at(mask_index + 2, PAD_RIGHT))
        return fctx, bctx

    def _directional(
        self, table: dict, totals: dict, ctx: tuple[str, str], word: str
    ) -> float:
        counts = table.get(ctx)
        c = counts.get(self._map(word), 0) if counts else 0
        total = totals.get(ctx, 0)
        return math.log((c + self.k) / (total + self.k * self._vocab_size))

    def word_log_prob(self, tokens: Sequence[str], mask_index: int, word: str) -> float:
        fctx, bctx = self._contexts(tokens, mask_index)
        return self._directional(
            self.forward, self.forward_totals, fctx, word
        ) + self._directional(self.backward, self.backward_totals, bctx, word)

    def score_candidates(
        self, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
    ) -> list[Candidate]:
        """Forced scoring: exactly the requested surface forms, deduplicated."""
        pool: dict[str, float] = {}
        for word in dict.fromkeys(candidates):  # first occurrence order
            pool[word] = self.word_log_prob(tokens, mask_index, word)
        return _ranked(pool)

    # -- generation ---------------------------------------------------------

    def generate(
        self,
        tokens: Sequence[str],
        mask_index: int,
        byte_length: int | None,
        top_k: int,
        beam: int = DEFAULT_BEAM,
    ) -> list[Candidate]:
        """Trie-beam decode of the masked word, boundary-terminated.

        Each beam item is a character prefix scored by the log mass of
        known words extending it; completing a word is the boundary event.
        """
        if byte_length is None:
            pool_words = [w for ws in self.by_byte_length.values() for w in ws]
        else:
            pool_words = self.by_byte_length.get(byte_length, [])
        if not pool_words:
            raise UnsatisfiableError(
                f"no known word has byte length {byte_length}"
            )
        scored = {w: self.word_log_prob(tokens, mask_index, w) for w in pool_words}

        completed: dict[str, float] = {}
        beams: list[tuple[str, list[str]]] = [("", pool_words)]
        while beams:
            extensions: dict[str, list[str]] = {}
            for prefix, members in beams:
                depth = len(prefix)
                for w in members:
                    if len(w) == depth:
                        merge_candidate(completed, w, scored[w])
                    else:
                        extensions.setdefault(prefix + w[depth], []).append(w)
            ranked_ext = sorted(
                extensions.items(),
                key=lambda kv: (-_log_mass([scored[w] for w in kv[1]]), kv[0]),
            )
            beams = ranked_ext[:beam]
        return _ranked(completed)[:top_k]


def _log_mass(scores: list[float]) -> float:
    hi = max(scores)
    return hi + math.log(sum(math.exp(s - hi) for s in scores))


def _ranked(pool: dict[str, float]) -> list[Candidate]:
    return [
        Candidate(w, s)
        for w, s in sorted(pool.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def load_model(corpus_path: str, k: float = DEFAULT_K) -> TrigramInfillModel:
    words = Path(corpus_path).read_text(encoding="utf-8").split()
    return TrigramInfillModel(words, k=k)
