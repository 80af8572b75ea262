"""Bayesian product-form combination of semantic and physical evidence.

For each candidate w the fused posterior is

    log_post(w) = weight * log_sem(w) + log_phys(w) - logsumexp(...)

normalized over the candidate set with a max-shifted logsumexp.  Both inputs
may be unnormalized: adding a constant to all semantic scores (or all
physical scores) shifts every fused exponent equally and cancels in the
normalizer, so the argmax is invariant.  weight=1 is the plain product;
weight=0 degenerates to the physical ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .masker import MaskedMessage, Vocabulary
from .physical_prior import CandidateIndex
from .semantic_prior import SemanticModel, display_tokens


@dataclass(frozen=True)
class CandidateScore:
    word: str
    log_sem: float
    log_phys: float
    log_post: float


@dataclass
class MaskOutcome:
    token_index: int
    chosen: str | None  # None = unresolved (empty candidate set)
    spliced: bytes  # bytes now at the span (hard-decision bytes if unresolved)
    table: list[CandidateScore]


@dataclass
class CorrectionOutcome:
    corrected_payload: bytes
    masks: list[MaskOutcome]


def fuse(
    log_sem: Mapping[str, float], log_phys: Mapping[str, float], weight: float = 1.0
) -> list[CandidateScore]:
    if set(log_sem) != set(log_phys):
        raise ValueError("semantic and physical score maps must share one key set")
    if not log_sem:
        raise ValueError("candidate set must be nonempty")
    if weight < 0:
        raise ValueError(f"semantic weight must be >= 0, got {weight}")
    words = sorted(log_sem)
    raw = np.array([weight * log_sem[w] + log_phys[w] for w in words])
    shifted = raw - raw.max()
    log_norm = raw.max() + np.log(np.exp(shifted).sum())
    return [
        CandidateScore(w, log_sem[w], log_phys[w], float(raw[i] - log_norm))
        for i, w in enumerate(words)
    ]


def select(scores: Sequence[CandidateScore]) -> str:
    """Highest posterior wins; ties break lexicographically ascending."""
    if not scores:
        raise ValueError("cannot select from an empty candidate list")
    return min(scores, key=lambda s: (-s.log_post, s.word)).word


def _select_by_map(scores: Mapping[str, float]) -> str:
    return min(scores.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def correct_message(
    masked: MaskedMessage,
    model: SemanticModel | None,
    vocab: Vocabulary,
    weight: float = 1.0,
    mode: str = "fused",
    index: CandidateIndex | None = None,
) -> CorrectionOutcome:
    """Resolve every mask independently and splice the winners into the
    payload.

    Masks are corrected in a single pass: each mask's context shows the
    other masks as placeholders, not as corrections.  A mask with no
    same-length candidates stays unresolved and keeps its hard-decision
    bytes, which honestly counts as a failure downstream.  mode selects the
    evidence actually used: "llr" ranks by physical likelihood alone (no
    semantic model required), "semantic" by the model alone, "fused" by the
    weighted Bayesian product.
    """
    if mode not in ("llr", "semantic", "fused"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "llr" and model is None:
        raise ValueError(f"mode {mode!r} needs a semantic model")
    index = index if index is not None else CandidateIndex(vocab)
    tokens = masked.tokens
    display = display_tokens(tokens, masked.mask_indices)
    corrected = bytearray(masked.payload)
    outcomes: list[MaskOutcome] = []
    for mask_pos, llr_slice in zip(masked.mask_indices, masked.llr_slices):
        span = tokens[mask_pos]
        words, phys = index.score_all(llr_slice)
        if not words:
            outcomes.append(MaskOutcome(mask_pos, None, span.data, []))
            continue
        cand_strs = [w.decode("utf-8") for w in words]
        log_phys = dict(zip(cand_strs, phys))
        table: list[CandidateScore] = []
        if mode == "llr":
            chosen = _select_by_map(log_phys)
        else:
            log_sem = model.score(display, mask_pos, cand_strs)
            if mode == "semantic":
                chosen = _select_by_map(log_sem)
            else:
                table = fuse(log_sem, log_phys, weight)
                chosen = select(table)
        chosen_bytes = chosen.encode("utf-8")
        corrected[span.start : span.end] = chosen_bytes
        outcomes.append(MaskOutcome(mask_pos, chosen, chosen_bytes, table))
    return CorrectionOutcome(corrected_payload=bytes(corrected), masks=outcomes)
