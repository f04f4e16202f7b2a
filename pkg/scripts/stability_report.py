#!/usr/bin/env python3
"""Run the full stability verification grid and print a summary table.

Covers the equilibrium-convergence, contact-loss, and ISS properties of the
normal-direction law plus the pipeline-vs-reduced-law equivalence check, over
the 27-point (m, k_e, f_H) grid.
"""

import argparse
import time
from collections import Counter

from admitsim.datasets import write_verification_csv
from admitsim.verify import run_default_verification


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="verification.csv")
    parser.add_argument("--prop3-duration", type=float, default=60.0)
    args = parser.parse_args()

    t0 = time.perf_counter()
    reports = run_default_verification(prop3_T=args.prop3_duration)
    elapsed = time.perf_counter() - t0
    write_verification_csv(args.out, reports)

    by_prop = Counter(r.proposition for r in reports)
    passed = Counter(r.proposition for r in reports if r.passed)
    for prop in ("prop1", "prop2", "prop3", "equivalence"):
        print(f"{prop:<12} {passed[prop]}/{by_prop[prop]} passed")
    failures = [r for r in reports if not r.passed]
    for r in failures:
        print(f"FAIL {r.proposition}: {r.params} -> {r.measured}")
    print(f"{len(reports)} checks in {elapsed:.1f}s, wrote {args.out}")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
