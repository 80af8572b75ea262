"""Semantic scoring of mask candidates.

Two interchangeable scorers: a built-in bidirectional trigram model (forward
plus backward pseudo-likelihood, so the score sees context on both sides of
the mask, like a masked LM does) and a thin client for the remote fill
service.  Scores are unnormalized log values; normalization happens once, in
the fusion step, where any constant offset cancels.
"""

from __future__ import annotations

import gzip
import json
import threading
from collections import Counter
from dataclasses import dataclass, field
from math import log
from pathlib import Path
from typing import Mapping, Protocol, Sequence

MASK_TOKEN = "<mask>"
UNK = "<unk>"
PAD_LEFT = "<s>"
PAD_RIGHT = "</s>"

NGRAM_ORDER = 3
DEFAULT_K = 0.01


class SemanticModel(Protocol):
    def score(
        self, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
    ) -> dict[str, float]: ...


class RemoteUnavailableError(Exception):
    """The fill service could not be reached (after one retry)."""


class RemoteProtocolError(Exception):
    """The fill service answered with something other than the wire contract."""


@dataclass
class NgramModel:
    """Add-k smoothed trigram counts in both directions.

    forward maps (w[i-2], w[i-1]) -> Counter of w[i]; backward maps
    (w[i+1], w[i+2]) -> Counter of w[i].  Out-of-vocabulary words (including
    mask placeholders) are folded into a single unknown symbol, so
    vocab_size = len(vocabulary) + 1 and smoothed forward probabilities sum
    to one over vocabulary + unknown.
    """

    vocab_words: frozenset[str]
    k: float = DEFAULT_K
    forward: dict[tuple[str, str], Counter] = field(default_factory=dict)
    backward: dict[tuple[str, str], Counter] = field(default_factory=dict)
    forward_totals: dict[tuple[str, str], int] = field(default_factory=dict)
    backward_totals: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab_words) + 1  # the unknown symbol is scoreable

    def _map(self, word: str) -> str:
        return word if word in self.vocab_words else UNK

    def _context(self, tokens: Sequence[str], i: int, j: int, pad: str) -> tuple[str, str]:
        def at(p: int) -> str:
            if p < 0 or p >= len(tokens):
                return pad
            return self._map(tokens[p])

        return at(i), at(j)

    def log_prob_forward(self, context: tuple[str, str], word: str) -> float:
        counts = self.forward.get(context)
        total = self.forward_totals.get(context, 0)
        c = counts.get(self._map(word), 0) if counts else 0
        return log((c + self.k) / (total + self.k * self.vocab_size))

    def log_prob_backward(self, context: tuple[str, str], word: str) -> float:
        counts = self.backward.get(context)
        total = self.backward_totals.get(context, 0)
        c = counts.get(self._map(word), 0) if counts else 0
        return log((c + self.k) / (total + self.k * self.vocab_size))

    def score(
        self, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
    ) -> dict[str, float]:
        return score_ngram(self, tokens, mask_index, candidates)

    def save(self, path) -> None:
        blob = {
            "format": "clsec-ngram",
            "version": 1,
            "k": self.k,
            "vocab": sorted(self.vocab_words),
            "forward": [[" ".join(ctx), dict(c)] for ctx, c in sorted(self.forward.items())],
            "backward": [[" ".join(ctx), dict(c)] for ctx, c in sorted(self.backward.items())],
        }
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            json.dump(blob, fh)

    @classmethod
    def load(cls, path) -> "NgramModel":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            blob = json.load(fh)
        if blob.get("format") != "clsec-ngram" or blob.get("version") != 1:
            raise ValueError(f"{path} is not a supported model file")
        model = cls(vocab_words=frozenset(blob["vocab"]), k=blob["k"])
        for key, counts in blob["forward"]:
            ctx = tuple(key.split(" "))
            model.forward[ctx] = Counter(counts)
            model.forward_totals[ctx] = sum(counts.values())
        for key, counts in blob["backward"]:
            ctx = tuple(key.split(" "))
            model.backward[ctx] = Counter(counts)
            model.backward_totals[ctx] = sum(counts.values())
        return model


def train_ngram(corpus_path, vocab, fraction: float = 1.0, k: float = DEFAULT_K) -> NgramModel:
    """Count forward and backward trigrams over the first `fraction` of the
    corpus word stream (the rest is typically held out for evaluation)."""
    words = Path(corpus_path).read_text(encoding="utf-8").split()
    words = words[: int(len(words) * fraction)]
    if not words:
        raise ValueError(f"corpus {corpus_path} has no words to train on")
    vocab_words = frozenset(w.decode("utf-8") for w in vocab.words)
    model = NgramModel(vocab_words=vocab_words, k=k)
    mapped = [w if w in vocab_words else UNK for w in words]
    n = len(mapped)
    for i, w in enumerate(mapped):
        fctx = (
            mapped[i - 2] if i >= 2 else PAD_LEFT,
            mapped[i - 1] if i >= 1 else PAD_LEFT,
        )
        bctx = (
            mapped[i + 1] if i + 1 < n else PAD_RIGHT,
            mapped[i + 2] if i + 2 < n else PAD_RIGHT,
        )
        model.forward.setdefault(fctx, Counter())[w] += 1
        model.backward.setdefault(bctx, Counter())[w] += 1
    model.forward_totals = {ctx: sum(c.values()) for ctx, c in model.forward.items()}
    model.backward_totals = {ctx: sum(c.values()) for ctx, c in model.backward.items()}
    return model


def score_ngram(
    model: NgramModel, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
) -> dict[str, float]:
    """log P_fwd(w | left context) + log P_bwd(w | right context).

    Context positions that are themselves masked score as the unknown
    symbol, which `_map` already arranges since the mask placeholder is not
    a vocabulary word.
    """
    if not 0 <= mask_index < len(tokens):
        raise IndexError(f"mask_index {mask_index} out of range for {len(tokens)} tokens")
    if not candidates:
        raise ValueError("candidate set must be nonempty")
    fctx = model._context(tokens, mask_index - 2, mask_index - 1, PAD_LEFT)
    bctx = model._context(tokens, mask_index + 1, mask_index + 2, PAD_RIGHT)
    return {
        w: model.log_prob_forward(fctx, w) + model.log_prob_backward(bctx, w)
        for w in candidates
    }


MISSING_CANDIDATE_GAP = 10.0


class RemoteModel:
    """Client for the fill service's POST /v1/fill endpoint.

    Candidates are sent explicitly, so the service scores exactly the words
    the pipeline cares about; anything it still omits gets a floor score of
    (minimum returned score - 10) to stay comparable without being
    competitive.  One retry on transport failure, then
    RemoteUnavailableError.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        max_inflight: int = 4,
        top_k: int = 32,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.top_k = top_k
        self._slots = threading.Semaphore(max_inflight)

    def score(
        self, tokens: Sequence[str], mask_index: int, candidates: Sequence[str]
    ) -> dict[str, float]:
        import httpx

        if not candidates:
            raise ValueError("candidate set must be nonempty")
        request = {
            "tokens": list(tokens),
            "mask_index": mask_index,
            "byte_length": len(candidates[0].encode("utf-8")),
            "top_k": max(self.top_k, len(candidates)),
            "candidates": list(candidates),
        }
        last_error: Exception | None = None
        for _ in range(2):  # one retry
            try:
                with self._slots:
                    response = httpx.post(
                        f"{self.endpoint}/v1/fill", json=request, timeout=self.timeout
                    )
                if response.status_code in (400, 422):
                    raise RemoteProtocolError(
                        f"fill service rejected the request: {response.status_code} {response.text[:200]}"
                    )
                if response.status_code != 200:
                    last_error = RuntimeError(f"HTTP {response.status_code}")
                    continue
                return self._parse(response.json(), candidates)
            except (httpx.TransportError, httpx.TimeoutException) as exc:
                last_error = exc
        raise RemoteUnavailableError(f"fill service unreachable at {self.endpoint}: {last_error}")

    @staticmethod
    def _parse(body, candidates: Sequence[str]) -> dict[str, float]:
        try:
            returned = {c["word"]: float(c["log_prob"]) for c in body["candidates"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise RemoteProtocolError(f"malformed fill response: {exc}") from exc
        floor = (min(returned.values()) if returned else 0.0) - MISSING_CANDIDATE_GAP
        return {w: returned.get(w, floor) for w in candidates}


def display_tokens(tokens, mask_indices: Sequence[int]) -> list[str]:
    """Token spans rendered for a semantic model: masked positions become the
    literal mask placeholder, everything else is its (vocabulary) text."""
    masked = set(mask_indices)
    out = []
    for i, t in enumerate(tokens):
        out.append(MASK_TOKEN if i in masked else t.data.decode("utf-8"))
    return out


def scores_to_str_keys(scores: Mapping[bytes, float]) -> dict[str, float]:
    return {w.decode("utf-8"): s for w, s in scores.items()}
