"""Monte Carlo evaluation: datasets, trials, PRR/MRA metrics, sweeps.

A trial pushes one word sequence through the full receive path:
modulation, AWGN, exact LLRs, 20-bit wire quantization, vocabulary
masking, and candidate resolution in one of three modes (``llr``,
``semantic``, ``fused``).  The corrected text is compared to the
transmitted text word-for-word.

Two metrics summarize a cell of trials:

* PRR -- fraction of sequences reproduced exactly;
* MRA -- correctly resolved masks over all masks generated (an empty
  candidate set still counts in the denominator).

Determinism contract: channel noise for trial ``i`` is drawn from a
substream keyed by (master seed, trial index) only -- never by mode --
so the three modes see identical noise and their metrics are paired.
Dataset spans are keyed by (master seed, sequence length).  Sweep CSVs
are byte-identical for a given master seed regardless of ``jobs``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np

from .channel_sim import (
    ChannelParams,
    compute_llrs,
    ebn0_db_from_noise_std,
    hard_decide,
    modulate,
    noise_std_from_ebn0_db,
    transmit,
)
from .fusion import correct_message
from .llr_frame import Frame, decode_frame, dequantize_llrs, encode_frame, quantize_llrs
from .masker import Vocabulary, build_masked_message
from .physical_prior import CandidateIndex
from .semantic_prior import NgramModel, RemoteModel
from .text_codec import bits_to_bytes, bytes_to_bits

__all__ = [
    "MODES",
    "TrialConfig",
    "TrialResult",
    "CellMetrics",
    "MetricsReport",
    "make_dataset",
    "run_trial",
    "sweep",
    "write_trial_csv",
    "write_aggregate_csv",
    "calibrate_noise_std",
    "corrupted_word_fraction",
]

MODES = ("llr", "semantic", "fused")

DELIMITER_BYTE = 0x20

# Seed-domain constants keep independent random purposes on disjoint
# substreams of the same master seed.
_NOISE_DOMAIN = 0xC7A2
_DATA_DOMAIN = 0xD151

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class TrialConfig:
    """One trial's knobs.  ``seed`` is the master seed; the per-trial
    noise substream is derived from (seed, trial_idx) alone."""

    mode: str
    seq_len: int
    snr_db: float
    seed: int
    trial_idx: int = 0
    semantic_weight: float = 1.0
    protect_delimiters: bool = False
    model: str = "ngram"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.seq_len < 1:
            raise ValueError("seq_len must be >= 1")
        if self.model not in ("ngram", "remote"):
            raise ValueError(f"unknown model selector {self.model!r}")


@dataclass(frozen=True)
class TrialResult:
    n_words: int
    n_masks: int
    n_resolved_correct: int
    n_silent_errors: int
    exact_match: bool


@dataclass(frozen=True)
class CellMetrics:
    mode: str
    seq_len: int
    snr_db: float
    trials: int
    prr: float
    prr_ci95: float
    mra: float | None  # None when no masks were generated (0/0 absent)
    mra_ci95: float | None
    total_masks: int


@dataclass(frozen=True)
class MetricsReport:
    noise_std: float
    master_seed: int
    cells: tuple[CellMetrics, ...]

    def cell(self, mode: str, seq_len: int) -> CellMetrics:
        for c in self.cells:
            if c.mode == mode and c.seq_len == seq_len:
                return c
        raise KeyError((mode, seq_len))


def make_dataset(
    corpus_words: list[str], seq_len: int, count: int, seed: int
) -> list[list[str]]:
    """Sample ``count`` contiguous spans of ``seq_len`` words.

    Spans come from the held-out tail of the corpus (first 80% of the
    stream is the model training region, last 20% is the eval region)
    with replacement, deterministic under (seed, seq_len).
    """
    split = int(len(corpus_words) * 0.8)
    region = corpus_words[split:]
    if seq_len > len(region):
        raise ValueError(
            f"seq_len {seq_len} exceeds eval region of {len(region)} words"
        )
    rng = np.random.default_rng(np.random.SeedSequence([seed, _DATA_DOMAIN, seq_len]))
    starts = rng.integers(0, len(region) - seq_len + 1, size=count)
    return [region[s : s + seq_len] for s in starts]


def _noise_seed(master_seed: int, trial_idx: int) -> int:
    ss = np.random.SeedSequence([master_seed, _NOISE_DOMAIN, trial_idx])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_trial(
    sequence: list[str],
    config: TrialConfig,
    vocab: Vocabulary,
    model=None,
    index: CandidateIndex | None = None,
) -> TrialResult:
    """Transmit one sequence and correct it per ``config.mode``.

    ``model`` may be None for mode="llr".  ``index`` is an optional
    shared CandidateIndex to avoid rebuilding per trial.
    """
    payload = " ".join(sequence).encode("ascii")
    noise_std = noise_std_from_ebn0_db(config.snr_db)
    params = ChannelParams(
        noise_std=noise_std, seed=_noise_seed(config.seed, config.trial_idx)
    )

    bits = bytes_to_bits(payload)
    symbols = modulate(bits)
    received = transmit(symbols, params)

    if config.protect_delimiters:
        # Word boundaries ride a clean side channel: delimiter bytes
        # arrive noiselessly, so tokenization never breaks.
        delim = np.frombuffer(payload, dtype=np.uint8) == DELIMITER_BYTE
        bit_mask = np.repeat(delim, 8)
        received = np.where(bit_mask, symbols, received)

    llrs = compute_llrs(received, params)

    # Through the wire: hard-decision payload + quantized LLRs.  The
    # corrector only ever sees what a frame can carry.
    hard_payload = bits_to_bytes(hard_decide(llrs))
    frame_bytes = encode_frame(Frame(payload=hard_payload, llrs_q=quantize_llrs(llrs)))
    frame = decode_frame(frame_bytes)
    wire_llrs = dequantize_llrs(frame.llrs_q)

    masked = build_masked_message(frame.payload, wire_llrs, vocab)
    outcome = correct_message(
        masked,
        model,
        vocab,
        weight=config.semantic_weight,
        mode=config.mode,
        index=index,
    )

    # Token-aligned scoring.  When token counts differ (a delimiter
    # byte was corrupted), positions are paired up to the shorter
    # length; structural breakage already forfeits exact_match.
    received_words = [t.data for t in masked.tokens]
    sent_words = [w.encode("ascii") for w in sequence]
    mask_set = set(masked.mask_indices)
    chosen = {m.token_index: m.spliced for m in outcome.masks}

    n_resolved = 0
    n_silent = 0
    for i in range(min(len(sent_words), len(received_words))):
        if i in mask_set:
            if chosen.get(i) == sent_words[i]:
                n_resolved += 1
        elif received_words[i] != sent_words[i]:
            n_silent += 1

    exact = outcome.corrected_payload == payload
    return TrialResult(
        n_words=len(sequence),
        n_masks=len(masked.mask_indices),
        n_resolved_correct=n_resolved,
        n_silent_errors=n_silent,
        exact_match=exact,
    )


# ---------------------------------------------------------------------------
# sweep machinery

_worker_state: dict = {}


def _init_worker(vocab, model_payload, corpus_words, base_config) -> None:
    _worker_state["vocab"] = vocab
    _worker_state["index"] = CandidateIndex(vocab)
    _worker_state["corpus_words"] = corpus_words
    _worker_state["base"] = base_config
    kind, value = model_payload
    if kind == "ngram":
        _worker_state["model"] = value
    elif kind == "remote":
        _worker_state["model"] = RemoteModel(value)
    else:
        _worker_state["model"] = None


def _run_cell_trial(task: tuple[str, int, int, tuple[str, ...]]) -> tuple:
    mode, seq_len, trial_idx, sequence = task
    base: TrialConfig = _worker_state["base"]
    config = replace(base, mode=mode, seq_len=seq_len, trial_idx=trial_idx)
    result = run_trial(
        list(sequence),
        config,
        _worker_state["vocab"],
        model=_worker_state["model"],
        index=_worker_state["index"],
    )
    return (mode, seq_len, trial_idx, result)


def sweep(
    corpus_words: list[str],
    vocab: Vocabulary,
    model,
    modes: list[str],
    seq_lens: list[int],
    snr_db: float,
    trials: int,
    master_seed: int,
    semantic_weight: float = 1.0,
    protect_delimiters: bool = False,
    jobs: int = 1,
) -> tuple[list[tuple], MetricsReport]:
    """Run trials × modes × lengths; return (trial rows, report).

    Trial rows are tuples matching the trial CSV schema, sorted by
    (mode, seq_len, trial_idx).  Results are byte-identical for a given
    master seed whatever ``jobs`` is, because every trial's randomness
    is derived from (master seed, trial index) and rows are sorted
    before output.
    """
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
    if isinstance(model, NgramModel) or model is None:
        model_payload = ("ngram", model)
    elif isinstance(model, RemoteModel):
        model_payload = ("remote", model.endpoint)
    else:
        model_payload = ("ngram", model)  # duck-typed scorer, must pickle

    base = TrialConfig(
        mode=modes[0],
        seq_len=seq_lens[0],
        snr_db=snr_db,
        seed=master_seed,
        semantic_weight=semantic_weight,
        protect_delimiters=protect_delimiters,
    )

    datasets = {
        seq_len: make_dataset(corpus_words, seq_len, trials, master_seed)
        for seq_len in seq_lens
    }
    tasks = [
        (mode, seq_len, idx, tuple(datasets[seq_len][idx]))
        for mode in modes
        for seq_len in seq_lens
        for idx in range(trials)
    ]

    if jobs <= 1:
        _init_worker(vocab, model_payload, corpus_words, base)
        outcomes = [_run_cell_trial(t) for t in tasks]
    else:
        ctx = get_context("fork")
        with ctx.Pool(
            jobs,
            initializer=_init_worker,
            initargs=(vocab, model_payload, corpus_words, base),
        ) as pool:
            outcomes = pool.map(_run_cell_trial, tasks, chunksize=8)

    outcomes.sort(key=lambda o: (o[0], o[1], o[2]))
    noise_std = noise_std_from_ebn0_db(snr_db)

    rows = []
    for mode, seq_len, trial_idx, r in outcomes:
        rows.append(
            (
                mode,
                seq_len,
                f"{snr_db:.6f}",
                trial_idx,
                r.n_words,
                r.n_masks,
                r.n_resolved_correct,
                r.n_silent_errors,
                int(r.exact_match),
            )
        )

    cells = []
    for mode in sorted(modes):
        for seq_len in sorted(seq_lens):
            sub = [o[3] for o in outcomes if o[0] == mode and o[1] == seq_len]
            n = len(sub)
            exact = sum(r.exact_match for r in sub)
            total_masks = sum(r.n_masks for r in sub)
            resolved = sum(r.n_resolved_correct for r in sub)
            prr = exact / n
            prr_ci = _Z95 * math.sqrt(prr * (1.0 - prr) / n)
            if total_masks > 0:
                mra = resolved / total_masks
                mra_ci = _Z95 * math.sqrt(mra * (1.0 - mra) / total_masks)
            else:
                mra = None
                mra_ci = None
            cells.append(
                CellMetrics(
                    mode=mode,
                    seq_len=seq_len,
                    snr_db=snr_db,
                    trials=n,
                    prr=prr,
                    prr_ci95=prr_ci,
                    mra=mra,
                    mra_ci95=mra_ci,
                    total_masks=total_masks,
                )
            )

    report = MetricsReport(
        noise_std=noise_std, master_seed=master_seed, cells=tuple(cells)
    )
    return rows, report


TRIAL_COLUMNS = (
    "mode",
    "seq_len",
    "snr_db",
    "trial_idx",
    "n_words",
    "n_masks",
    "n_resolved_correct",
    "n_silent_errors",
    "exact_match",
)

AGGREGATE_COLUMNS = (
    "mode",
    "seq_len",
    "snr_db",
    "trials",
    "prr",
    "prr_ci95",
    "mra",
    "mra_ci95",
    "total_masks",
)


def write_trial_csv(path: str, rows: list[tuple], report: MetricsReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# noise_std={report.noise_std:.9f} master_seed={report.master_seed}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)
        writer.writerows(rows)


def write_aggregate_csv(path: str, report: MetricsReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# noise_std={report.noise_std:.9f} master_seed={report.master_seed}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for c in report.cells:
            writer.writerow(
                (
                    c.mode,
                    c.seq_len,
                    f"{c.snr_db:.6f}",
                    c.trials,
                    f"{c.prr:.6f}",
                    f"{c.prr_ci95:.6f}",
                    "" if c.mra is None else f"{c.mra:.6f}",
                    "" if c.mra_ci95 is None else f"{c.mra_ci95:.6f}",
                    c.total_masks,
                )
            )


# ---------------------------------------------------------------------------
# operating-point calibration


def corrupted_word_fraction(words: list[str], noise_std: float) -> float:
    """Expected fraction of corrupted words at ``noise_std``.

    A word of k bytes survives iff none of its 8k bits flips; the
    per-bit flip probability is Q(1/sigma).  Frequencies are taken from
    the given word stream, so repeated words weigh accordingly.
    """
    ber = 0.5 * math.erfc(1.0 / (noise_std * math.sqrt(2.0)))
    by_len: dict[int, int] = {}
    for w in words:
        by_len[len(w)] = by_len.get(len(w), 0) + 1
    total = len(words)
    return sum(
        count * (1.0 - (1.0 - ber) ** (8 * length)) / total
        for length, count in by_len.items()
    )


def calibrate_noise_std(
    words: list[str], target_fraction: float, tol: float = 1e-9
) -> float:
    """Find sigma with expected corrupted-word fraction = target.

    Monotone in sigma, solved by bisection.
    """
    if not 0.0 < target_fraction < 1.0:
        raise ValueError("target_fraction must be in (0, 1)")
    lo, hi = 1e-3, 10.0
    if corrupted_word_fraction(words, hi) < target_fraction:
        raise ValueError("target fraction unreachable below sigma=10")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if corrupted_word_fraction(words, mid) < target_fraction:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)
