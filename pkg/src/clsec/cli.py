"""Command-line entry point: simulate sweeps, correct frame files, frame tooling.

Exit discipline: 0 success, 1 runtime failure (bad frame, unreachable
service, broken input file), 2 usage errors.  Error text goes to
standard error.  A JSON config file (``--config``) can preload any
flag; explicit flags win.  No network traffic happens unless
``--model remote`` is selected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .eval_harness import (
    MODES,
    sweep,
    write_aggregate_csv,
    write_trial_csv,
)
from .fusion import correct_message
from .llr_frame import (
    FLAG_LLRS,
    Frame,
    FrameError,
    TruncatedStreamError,
    decode_frame,
    dequantize_llr,
    dequantize_llrs,
    encode_frame,
    quantize_llr,
)
from .masker import build_masked_message, load_vocabulary
from .semantic_prior import DEFAULT_K, NgramModel, RemoteModel, train_ngram

DEFAULT_ENDPOINT = "http://127.0.0.1:8570"
ENDPOINT_ENV = "CLSEC_LM_ENDPOINT"

TRAIN_FRACTION = 0.8  # model fit region; eval spans come from the rest


def _read_corpus_words(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").split()


def _resolve_endpoint(flag_value: str | None) -> str:
    if flag_value:
        return flag_value
    return os.environ.get(ENDPOINT_ENV, DEFAULT_ENDPOINT)


def _build_model(args, fraction: float):
    if args.model == "remote":
        return RemoteModel(_resolve_endpoint(args.endpoint))
    vocab = load_vocabulary(args.vocab)
    return train_ngram(args.corpus, vocab, fraction=fraction, k=args.smoothing_k)


def cmd_simulate(args) -> int:
    corpus_words = _read_corpus_words(args.corpus)
    vocab = load_vocabulary(args.vocab)
    model = None
    modes = list(MODES) if args.mode == "all" else [args.mode]
    if any(m != "llr" for m in modes):
        model = _build_model(args, TRAIN_FRACTION)
    lens = args.len or [15]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, report = sweep(
        corpus_words,
        vocab,
        model,
        modes=modes,
        seq_lens=lens,
        snr_db=args.snr_db,
        trials=args.trials,
        master_seed=args.seed,
        semantic_weight=args.semantic_weight,
        protect_delimiters=args.protect_delimiters,
        jobs=args.jobs,
    )
    write_trial_csv(str(out_dir / "trials.csv"), rows, report)
    write_aggregate_csv(str(out_dir / "aggregate.csv"), report)
    return 0


def cmd_correct(args) -> int:
    data = Path(args.infile).read_bytes()
    frame = decode_frame(data)
    if not frame.flags & FLAG_LLRS:
        print("error: frame carries no reliability values", file=sys.stderr)
        return 1
    vocab = load_vocabulary(args.vocab)
    model = _build_model(args, fraction=1.0)
    llrs = dequantize_llrs(frame.llrs_q)
    masked = build_masked_message(frame.payload, llrs, vocab)
    outcome = correct_message(
        masked, model, vocab, weight=args.semantic_weight, mode="fused"
    )
    sys.stdout.write(outcome.corrected_payload.decode("utf-8", errors="replace"))
    sys.stdout.write("\n")
    return 0


def _dump_frame(frame: Frame) -> str:
    lines = [f"payload={frame.payload.hex()}", f"flags={frame.flags:#04x}"]
    # one reliability value per line; k/128 prints exactly in 7 decimals
    lines.extend(f"{dequantize_llr(int(q)):.7f}" for q in frame.llrs_q)
    return "\n".join(lines) + "\n"


def _parse_dump(text: str) -> Frame:
    import numpy as np

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("payload=") or not lines[1].startswith("flags="):
        raise ValueError("dump must start with payload=<hex> and flags=<hex> lines")
    payload = bytes.fromhex(lines[0][len("payload=") :])
    flags = int(lines[1][len("flags=") :], 16)
    llrs_q = np.array([quantize_llr(float(ln)) for ln in lines[2:]], dtype=np.int32)
    return Frame(payload=payload, llrs_q=llrs_q, flags=flags)


def cmd_frame(args) -> int:
    if args.frame_op == "decode":
        data = Path(args.infile).read_bytes()
        frame = decode_frame(data)
        dump = _dump_frame(frame)
        if args.out:
            Path(args.out).write_text(dump, encoding="utf-8")
        else:
            sys.stdout.write(dump)
        return 0
    # encode
    text = Path(args.infile).read_text(encoding="utf-8")
    frame = _parse_dump(text)
    blob = encode_frame(frame)
    if args.out:
        Path(args.out).write_bytes(blob)
    else:
        sys.stdout.buffer.write(blob)
    return 0


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("ngram", "remote"), default="ngram",
                   help="semantic scorer: built-in n-gram or remote fill service")
    p.add_argument("--endpoint", default=None,
                   help=f"fill-service base URL (or ${ENDPOINT_ENV})")
    p.add_argument("--semantic-weight", type=float, default=1.0,
                   help="weight on semantic log-probabilities in fusion")
    p.add_argument("--smoothing-k", type=float, default=DEFAULT_K,
                   help="additive smoothing constant for the n-gram model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clsec",
        description="Vocabulary-masked error correction over a soft-decision channel",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run Monte Carlo sweeps, write CSV metrics")
    sim.add_argument("--config", default=None, help="JSON file preloading any flag")
    sim.add_argument("--corpus", required=True, help="plain-text word-stream file")
    sim.add_argument("--vocab", required=True, help="one word per line")
    sim.add_argument("--snr-db", type=float, default=3.0, help="Eb/N0 in dB")
    sim.add_argument("--len", type=int, action="append",
                     help="sequence length in words (repeatable)")
    sim.add_argument("--trials", type=int, default=100, help="sequences per cell")
    sim.add_argument("--mode", choices=MODES + ("all",), default="fused")
    sim.add_argument("--seed", type=int, default=0, help="master seed")
    sim.add_argument("--out", required=True, help="output directory for CSVs")
    sim.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="worker processes (results independent of this)")
    sim.add_argument("--protect-delimiters", action="store_true",
                     help="deliver word-boundary bytes noiselessly")
    _add_model_flags(sim)

    cor = sub.add_parser("correct", help="decode one .clsf frame and print corrected text")
    cor.add_argument("--config", default=None)
    cor.add_argument("--in", dest="infile", required=True, help=".clsf frame file")
    cor.add_argument("--corpus", required=True)
    cor.add_argument("--vocab", required=True)
    _add_model_flags(cor)

    fr = sub.add_parser("frame", help="convert between .clsf and a text dump")
    frsub = fr.add_subparsers(dest="frame_op", required=True)
    fenc = frsub.add_parser("encode", help="text dump -> .clsf")
    fenc.add_argument("--in", dest="infile", required=True)
    fenc.add_argument("--out", default=None)
    fdec = frsub.add_parser("decode", help=".clsf -> text dump")
    fdec.add_argument("--in", dest="infile", required=True)
    fdec.add_argument("--out", default=None)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load --config JSON (if present) as parser defaults; flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    with open(path, encoding="utf-8") as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise ValueError("config file must hold a JSON object")
    renames = {"in": "infile"}
    flat = {renames.get(k.replace("-", "_"), k.replace("-", "_")): v for k, v in values.items()}
    for action in parser._subparsers._group_actions:  # set on every subparser
        for sp in action.choices.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in flat.items() if k in known})
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad config file: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "correct":
            return cmd_correct(args)
        if args.command == "frame":
            return cmd_frame(args)
        parser.error(f"unknown command {args.command!r}")
    except TruncatedStreamError as exc:
        print(f"error: truncated stream: {exc}", file=sys.stderr)
        return 1
    except FrameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
