"""Per-member key computation cost for sizes 128..576, both variants, written to CSV."""

import sys
from pathlib import Path

from groupkey.bench import BenchConfig, run_bench


def main() -> None:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "reports/bench.csv")
    report = run_bench(BenchConfig())
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_csv())
    print(report.to_csv(), end="")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
