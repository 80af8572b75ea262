#!/usr/bin/env python3
"""Report the noise level that produces a target word-corruption rate.

For each requested target, solves for sigma over the given corpus and
prints sigma, the equivalent Eb/N0, the per-bit error rate, and the
resulting expected fraction of corrupted words.

Example:
    python3 scripts/calibrate.py --corpus data/corpus.txt --target 0.05 0.10 0.15
"""

import argparse
import math
import pathlib

from clsec.channel_sim import ebn0_db_from_noise_std
from clsec.eval_harness import calibrate_noise_std, corrupted_word_fraction


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", required=True, help="plain-text word-stream file")
    parser.add_argument(
        "--target",
        type=float,
        nargs="+",
        default=[0.05, 0.10, 0.15],
        help="word-corruption fractions to solve for",
    )
    args = parser.parse_args()

    words = pathlib.Path(args.corpus).read_text(encoding="utf-8").split()
    mean_len = sum(len(w) for w in words) / len(words)
    print(f"corpus: {len(words)} words, mean length {mean_len:.2f} bytes")
    print(f"{'target':>8} {'sigma':>10} {'Eb/N0 dB':>10} {'BER':>10} {'achieved':>10}")
    for target in args.target:
        sigma = calibrate_noise_std(words, target)
        ber = 0.5 * math.erfc(1.0 / (sigma * math.sqrt(2.0)))
        achieved = corrupted_word_fraction(words, sigma)
        print(
            f"{target:8.3f} {sigma:10.6f} {ebn0_db_from_noise_std(sigma):10.4f} "
            f"{ber:10.6f} {achieved:10.6f}"
        )


if __name__ == "__main__":
    main()
