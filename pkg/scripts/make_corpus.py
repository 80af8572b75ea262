#!/usr/bin/env python3
"""Generate the synthetic logbook corpus and its vocabulary file."""

import argparse
from pathlib import Path

from clsec.corpusgen import write_corpus_files


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data", help="directory for corpus.txt / vocab.txt")
    ap.add_argument("--words", type=int, default=60000, help="minimum corpus length in words")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_words, n_vocab = write_corpus_files(
        str(out / "corpus.txt"), str(out / "vocab.txt"), n_words=args.words, seed=args.seed
    )
    print(f"wrote {n_words} words, vocabulary of {n_vocab} entries, to {out}/")


if __name__ == "__main__":
    main()
