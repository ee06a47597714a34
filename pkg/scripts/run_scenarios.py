"""Simulate seeded random scenarios, run detection, and score it against
ground truth.  Prints one line per scenario and a JSON summary."""

import argparse
import json
import time

from routevents.detector import detect_events
from routevents.scenarios import random_scenario
from routevents.simulator import validate_inference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--first", type=int, default=0)
    ap.add_argument("--threshold", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    totals = dict(visible=0, matched=0, scope_exact=0, inferred=0, unmatched_inferred=0,
                  type_correct=0)
    t0 = time.perf_counter()
    for seed in range(args.first, args.first + args.seeds):
        sc = random_scenario(seed)
        paths, truths = sc.run()
        events, stats = detect_events(paths, args.threshold, args.threads)
        rep = validate_inference(events, truths)
        totals["visible"] += rep.visible
        totals["matched"] += rep.matched_truth
        totals["scope_exact"] += rep.scope_exact
        totals["inferred"] += rep.inferred
        totals["unmatched_inferred"] += len(rep.unmatched_inferred)
        totals["type_correct"] += rep.type_correct
        print(f"seed {seed:3d}: {len(sc.topology.vertices):2d} vertices "
              f"{len(sc.topology.probes):2d} pairs {stats.transitions:4d} transitions  "
              f"visible {rep.visible} inferred {rep.inferred}  "
              f"completeness {rep.completeness:.2f} correctness {rep.correctness:.2f} "
              f"types {rep.type_accuracy:.2f}")
    totals["seconds"] = round(time.perf_counter() - t0, 2)
    print(json.dumps(totals, sort_keys=True))


if __name__ == "__main__":
    main()
