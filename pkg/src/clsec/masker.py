"""Corruption detection by vocabulary membership.

A received token that is not a vocabulary word is flagged as a mask; its LLR
slice (one value per bit of the token's byte span) travels with it so the
physical prior can score replacement candidates.  A corruption that lands on
another vocabulary word is inherently undetectable here and passes through
silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .text_codec import TokenSpan, tokenize


class VocabularyError(Exception):
    pass


@dataclass(frozen=True)
class Vocabulary:
    words: frozenset[bytes]
    by_length: dict[int, tuple[bytes, ...]]

    @classmethod
    def from_words(cls, words) -> "Vocabulary":
        unique = set()
        for w in words:
            b = w.encode("utf-8") if isinstance(w, str) else bytes(w)
            if not b:
                continue
            if any(c in b for c in b" \t\r\n\x0b\x0c"):
                raise VocabularyError(f"vocabulary entry {b!r} contains whitespace")
            unique.add(b)
        by_length: dict[int, list[bytes]] = {}
        for w in unique:
            by_length.setdefault(len(w), []).append(w)
        return cls(
            words=frozenset(unique),
            by_length={n: tuple(sorted(ws)) for n, ws in by_length.items()},
        )

    def __contains__(self, word: bytes) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_vocabulary(path) -> Vocabulary:
    """One word per line, UTF-8; duplicates and empty lines are dropped."""
    text = Path(path).read_text(encoding="utf-8")
    return Vocabulary.from_words(line.strip("\n\r") for line in text.splitlines())


@dataclass
class MaskedMessage:
    payload: bytes
    tokens: list[TokenSpan]
    mask_indices: list[int]
    llr_slices: list[np.ndarray] = field(repr=False)
    skipped_segments: int = 0


def build_masked_message(payload: bytes, llrs: np.ndarray, vocab: Vocabulary) -> MaskedMessage:
    llrs = np.asarray(llrs, dtype=np.float64)
    if len(llrs) != 8 * len(payload):
        raise ValueError(f"{len(llrs)} LLRs for {len(payload)} payload bytes; need 8 per byte")
    tokens, skipped = tokenize(payload)
    mask_indices = [i for i, t in enumerate(tokens) if t.data not in vocab]
    slices = [llrs[8 * tokens[i].start : 8 * tokens[i].end] for i in mask_indices]
    return MaskedMessage(
        payload=payload,
        tokens=tokens,
        mask_indices=mask_indices,
        llr_slices=slices,
        skipped_segments=skipped,
    )
