"""Phase timing on synthetic flapping inputs.

Run as ``python -m routevents.benchmark`` to get one JSON object on stdout;
run it in a fresh interpreter so heap state from other work does not leak
into the numbers.
"""

from __future__ import annotations

import argparse
import gc
import json
import math
import statistics
import time
from typing import Sequence

from .detector import detect_events, extract_transitions, group_paths, sweep_candidates
from .scenarios import flapping_paths


def time_phase12(paths) -> tuple[float, int]:
    """Wall time of phases 1 and 2, with the collector paused (as timeit does)."""
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter()
        transitions = extract_transitions(group_paths(paths))
        sweep_candidates(transitions)
        return time.perf_counter() - t0, len(transitions)
    finally:
        gc.enable()


def per_doubling(seconds: Sequence[float], sizes: Sequence[int]) -> float:
    """Growth factor per doubling of input from a least-squares fit of
    log time against log size (2.0 for linear, 4.0 for quadratic)."""
    fit = statistics.linear_regression([math.log2(n) for n in sizes],
                                       [math.log2(t) for t in seconds])
    return 2 ** fit.slope


def run(sizes: Sequence[int], rounds: int = 7, threshold: int = 10) -> dict:
    inputs = {n: flapping_paths(n) for n in sizes}
    best = {n: float("inf") for n in sizes}
    counts = {}
    for _ in range(rounds):  # interleaved so drift hits every size alike
        for n in sizes:
            t, counts[n] = time_phase12(inputs[n])
            best[n] = min(best[n], t)
    largest = inputs[max(sizes)]
    t0 = time.perf_counter()
    events, stats = detect_events(largest, threshold)
    total = time.perf_counter() - t0
    return {
        "sizes": list(sizes),
        "transitions": [counts[n] for n in sizes],
        "phase12_seconds": [best[n] for n in sizes],
        "ratios": [best[b] / best[a] for a, b in zip(sizes, sizes[1:])],
        "fitted_ratio": per_doubling([best[n] for n in sizes], sizes),
        "full_run_seconds": total,
        "full_run_candidates": stats.candidates,
        "full_run_events": len(events),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[25_000, 50_000, 100_000])
    ap.add_argument("--rounds", type=int, default=7)
    args = ap.parse_args(argv)
    print(json.dumps(run(args.sizes, args.rounds)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
