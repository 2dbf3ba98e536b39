"""Recompute every published FDR row from its printed FMR/FNMR cells.

Prints one line per operating point and flags rows where the printed FDR
differs from the recomputed value by more than the tolerance.
"""

import argparse
import json
from pathlib import Path

from fdrkit.fdr import a_gap, b_gap, fdr

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "published_tables.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tables", type=Path, default=FIXTURE)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--tol", type=float, default=0.002)
    args = ap.parse_args()

    mismatches = total = 0
    for t in json.loads(args.tables.read_text()):
        name = " / ".join(x for x in (t["dataset"], t["system"], t["cohort"]) if x)
        for i, x in enumerate(t["exponents"]):
            fm = {c["enroll"]: c["values"][i] for c in t["fmr"] if c["enroll"] == c["probe"]}
            fn = {c["demographic"]: c["values"][i] for c in t["fnmr"]}
            value = fdr(a_gap(fm), b_gap(fn), args.alpha)
            printed = t["fdr"][i]
            off = abs(value - printed) > args.tol + 1e-12
            total += 1
            mismatches += off
            print(f"{name:<40} 10^-{x:<2} computed {value:.4f}  printed {printed:<7} {'MISMATCH' if off else ''}")
    print(f"\n{mismatches} of {total} rows outside +-{args.tol}")


if __name__ == "__main__":
    main()
