"""Flip every single bit and every pair of bits of every codeword and tally decoder outcomes."""

import argparse
import itertools
from collections import Counter

from groupkey.ldpc import DecodeFailure, TannerGraph, build_stopping_set, bundled_matrix, decode, encode, load_matrix


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--matrix", help="parity-check matrix file (default: bundled 8x16)")
    ap.add_argument("--max-info-flips", type=int, default=None)
    args = ap.parse_args()
    h = load_matrix(args.matrix) if args.matrix else bundled_matrix()
    s = build_stopping_set(TannerGraph(h), 3)
    print(f"n={s.n} k={s.k} r={s.r} transmit order {[f'X{j + 1}' for j in s.transmit_order]}")
    for weight in (1, 2):
        tally: Counter[str] = Counter()
        worst = 0
        for info in itertools.product((0, 1), repeat=s.k):
            c = encode(s, info)
            for pattern in itertools.combinations(range(s.n), weight):
                wire = list(c.wire_bits)
                for j in pattern:
                    wire[j] ^= 1
                try:
                    out = decode(s, wire, max_info_flips=args.max_info_flips)
                except DecodeFailure:
                    tally["unrecoverable"] += 1
                    continue
                worst = max(worst, out.trials)
                tally["recovered" if out.info == info else "miscorrected"] += 1
        print(f"{weight}-bit errors: {dict(sorted(tally.items()))}, most trials {worst}")


if __name__ == "__main__":
    main()
