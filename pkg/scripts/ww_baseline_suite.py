#!/usr/bin/env python3
"""Run the wiping comparison suite: force-aware control vs blind-stiffness
baselines, with and without the board-raise disturbance.

Prints one summary row per (mode, condition) and writes the CSV. The expected
pattern: the low baseline leaves the most ink, the high baseline trips the
safety monitor under the raise, and the force-aware mode does neither.
"""

import argparse

from admitsim.datasets import write_suite_csv
from admitsim.harness import ScenarioConfig, default_disturbance, run_suite
from admitsim.policy import NoiseSpec

NOISE = NoiseSpec(pos_std=0.002, rot_std=0.01, normal_cone_std=0.05,
                  contact_flip_prob=0.01, seed=0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=25)
    parser.add_argument("--out", default="ww_suite.csv")
    args = parser.parse_args()

    cfgs = []
    for mode in ("force_aware", "baseline_low", "baseline_mid", "baseline_high"):
        for disturbed in (False, True):
            for s in range(args.seeds):
                cfgs.append(ScenarioConfig(
                    task="WW", mode=mode, duration=25.0, seed=s, noise=NOISE,
                    disturbances=default_disturbance("WW") if disturbed else (),
                ))
    rows = run_suite(cfgs)
    write_suite_csv(args.out, rows)
    print(f"{'mode':<14} {'dist':<5} {'success':<8} {'stops':<6} {'ink cm':<7} {'peak N':<7}")
    for r in rows:
        print(f"{r.mode:<14} {int(r.disturbed):<5} {r.success_rate:<8.2f} "
              f"{r.safety_stop_rate:<6.2f} {r.mean_remaining_ink_cm:<7.2f} "
              f"{r.mean_peak_force_n:<7.2f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
