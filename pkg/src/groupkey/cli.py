"""Command-line entry point: ``groupkey sim|ldpc|bench``.

Exit codes: 0 success, 1 usage or configuration error, 2 simulation with a
delivery failure or a member out of sync, 3 undecodable word.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import bench as bench_mod
from .ldpc import (
    DecodeFailure,
    MatrixFormatError,
    build_stopping_set,
    bits_from_string,
    bits_to_string,
    bundled_matrix,
    decode,
    encode,
    load_matrix,
)
from .ldpc.stopping_set import ConstructionError
from .ldpc.oracle import RankError
from .protocol import ConfigError, load_config, run_scenario

REPORT_DIR_ENV = "GROUPKEY_REPORT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_DELIVERY, EXIT_UNRECOVERABLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("groupkey").joinpath("data/scenarios")
    return {p.name.removesuffix(".json"): Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def _resolve_scenario(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_scenarios()
    if name in bundled:
        return bundled[name]
    raise ConfigError(f"no such scenario file or bundled scenario: {name}")


def cmd_sim(args) -> int:
    try:
        cfg = load_config(_resolve_scenario(args.config))
        report = run_scenario(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or os.environ.get(REPORT_DIR_ENV) or "reports"
    json_path, csv_path = report.write(out)
    for e in report.events:
        chain = ",".join(map(str, e.updated_nodes)) or "-"
        status = "ok" if e.converged and not e.failures else f"{len(e.failures)} failure(s)"
        print(f"event {e.index} {e.kind} {e.member or ''}: {e.converged_count}/{e.member_count} "
              f"converged, updated [{chain}], trials {e.trials}, {status}")
    print(f"report: {json_path} {csv_path}")
    return EXIT_OK if report.ok else EXIT_DELIVERY


def _schedule(args):
    h = load_matrix(args.matrix) if args.matrix else bundled_matrix()
    return build_stopping_set(h, args.max_bit_degree)


def _flips(text: str | None, order: Sequence[int]) -> list[int]:
    """Wire positions from ``3,7`` (0-based) or bit labels like ``X16``."""
    if not text:
        return []
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok[:1] in ("X", "x"):
            out.append(order.index(int(tok[1:]) - 1))
        else:
            out.append(int(tok))
    bad = [j for j in out if not 0 <= j < len(order)]
    if bad:
        raise ValueError(f"flip position {bad[0]} outside the {len(order)}-bit word")
    return out


def cmd_ldpc(args) -> int:
    try:
        s = _schedule(args)
        bits = bits_from_string(args.bits)
        flips = _flips(args.flip, s.transmit_order)
    except (OSError, MatrixFormatError, RankError, ConstructionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.action == "encode":
        if len(bits) != s.k:
            print(f"error: expected {s.k} information bits, got {len(bits)}", file=sys.stderr)
            return EXIT_USAGE
        print(encode(s, bits))
        return EXIT_OK

    if args.action == "decode":
        if len(bits) != s.n:
            print(f"error: expected a {s.n}-bit wire word, got {len(bits)}", file=sys.stderr)
            return EXIT_USAGE
        word = list(bits)
        for j in flips:
            word[j] ^= 1
        try:
            out = decode(s, word, max_info_flips=args.max_info_flips)
        except DecodeFailure as exc:
            print(f"UNRECOVERABLE syndrome {bits_to_string(exc.syndrome)} trials {exc.trials}")
            return EXIT_UNRECOVERABLE
        print(f"info {bits_to_string(out.info)}")
        print(f"trials {out.trials}")
        print(f"case {out.case}")
        print(f"corrected {out.corrected}")
        return EXIT_OK

    # roundtrip
    if len(bits) != s.k:
        print(f"error: expected {s.k} information bits, got {len(bits)}", file=sys.stderr)
        return EXIT_USAGE
    sent = encode(s, bits)
    patterns = [[j] for j in range(s.n)] if args.sweep else [flips]
    wins = 0
    for pattern in patterns:
        wire = list(sent.wire_bits)
        for j in pattern:
            wire[j] ^= 1
        label = ",".join(f"X{s.transmit_order[j] + 1}" for j in pattern) or "none"
        try:
            out = decode(s, wire, max_info_flips=args.max_info_flips)
        except DecodeFailure as exc:
            print(f"flip {label}: UNRECOVERABLE syndrome {bits_to_string(exc.syndrome)}")
            continue
        ok = out.info == tuple(bits)
        wins += ok
        print(f"flip {label}: {'recovered' if ok else 'MISCORRECTED'} trials {out.trials} case {out.case}")
    print(f"{wins}/{len(patterns)} successes")
    return EXIT_OK if wins == len(patterns) else EXIT_UNRECOVERABLE


def cmd_bench(args) -> int:
    try:
        cfg = bench_mod.BenchConfig(
            sizes=bench_mod.parse_sizes(args.sizes),
            seed=args.seed,
            variants=tuple(args.variants.split(",")),
            reps=args.reps,
            sample=args.sample,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = bench_mod.run_bench(cfg)
    text = report.to_csv()
    if args.out:
        out = Path(args.out)
        if not out.is_absolute() and os.environ.get(REPORT_DIR_ENV):
            out = Path(os.environ[REPORT_DIR_ENV]) / out
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(f"wrote {out}")
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="groupkey", description=__doc__.splitlines()[0],
                epilog=f"Reports go to --out, else ${REPORT_DIR_ENV}, else ./reports.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("sim", help="run a scenario and write JSON and CSV reports")
    sim.add_argument("config", help="scenario JSON file, or the name of a bundled scenario (fig3, stress16, ...)")
    sim.add_argument("--out", help=f"report directory (default ${REPORT_DIR_ENV} or ./reports)")
    sim.set_defaults(func=cmd_sim)

    ld = sub.add_parser("ldpc", help="encode, decode, or round-trip words")
    ld.add_argument("action", choices=("encode", "decode", "roundtrip"))
    ld.add_argument("--matrix", help="dense parity-check matrix file (default: the bundled 8x16 code)")
    ld.add_argument("--bits", required=True,
                    help="information bits (encode, roundtrip) or a wire-order word (decode)")
    ld.add_argument("--flip", help="comma-separated wire positions (0-based) or labels like X16 to flip first")
    ld.add_argument("--sweep", action="store_true", help="roundtrip: try a single flip at every position")
    ld.add_argument("--max-info-flips", type=int, default=None,
                    help="largest number of information bits the decoder may hypothesize as flipped (default: all)")
    ld.add_argument("--max-bit-degree", type=int, default=3, help="degree bound for the encoding schedule")
    ld.set_defaults(func=cmd_ldpc)

    b = sub.add_parser("bench", help="per-member key computation cost across group sizes")
    b.add_argument("--sizes", default=",".join(map(str, bench_mod.DEFAULT_SIZES)), help="comma-separated group sizes")
    b.add_argument("--seed", type=int, default=0, help="seed for leaf secrets and member sampling")
    b.add_argument("--out", help="CSV file to write (relative paths go under the report directory if set)")
    b.add_argument("--variants", default="etf,plain", help="etf, plain, or both")
    b.add_argument("--reps", type=int, default=5, help="timing repetitions per member (median taken)")
    b.add_argument("--sample", type=int, default=32, help="members timed per size")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
