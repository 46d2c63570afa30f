#!/usr/bin/env python3
"""Large seeded fuzz campaign over both scalar backends.

Runs the full strategy mix, prints the aggregate property report, the
phase-transition audit, and exits non-zero on any violation. Tune the sizes
from the command line for longer soaks.
"""
import argparse
import sys
import time

sys.path.insert(0, "src")

from robogather import verify
from robogather.scalars import EXACT, FLOAT64


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs-exact", type=int, default=1000)
    parser.add_argument("--runs-float", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ng-min", type=int, default=3)
    parser.add_argument("--ng-max", type=int, default=8)
    args = parser.parse_args()

    report = verify.CheckReport()
    t0 = time.time()
    for backend, runs in ((FLOAT64, args.runs_float), (EXACT, args.runs_exact)):
        part, cex = verify.fuzz(
            runs, backend, ng_range=(args.ng_min, args.ng_max), seed=args.seed
        )
        print(f"[{backend.name}] {runs} runs, ok={part.ok}")
        report.merge(part)
        for c in cex:
            print(f"  counterexample seed {c.spec.run_seed} ({c.spec.strategy_kind})")
    print()
    print(report.summary())
    print()
    never = sorted(f"{a.value}->{b.value}" for a, b in report.unobserved_arcs())
    for arc in never:
        print(f"expected arc never observed: {arc}")
    print(f"\ntotal time: {time.time() - t0:.1f}s")
    return 0 if report.ok else 3


if __name__ == "__main__":
    sys.exit(main())
