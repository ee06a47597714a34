"""Phase 1+2 timing on growing synthetic inputs (fresh interpreter per call)."""

import argparse
import json
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[25_000, 50_000, 100_000, 200_000])
    ap.add_argument("--rounds", type=int, default=3)
    args = ap.parse_args()
    cmd = [sys.executable, "-m", "routevents.benchmark", "--rounds", str(args.rounds),
           "--sizes", *map(str, args.sizes)]
    r = json.loads(subprocess.run(cmd, capture_output=True, text=True, check=True).stdout)
    print(f"{'transitions':>12} {'seconds':>8} {'ratio':>6}")
    prev = None
    for n, t in zip(r["transitions"], r["phase12_seconds"]):
        print(f"{n:>12} {t:8.3f} {t / prev:6.2f}" if prev else f"{n:>12} {t:8.3f} {'':>6}")
        prev = t
    print(f"fitted growth per doubling: {r['fitted_ratio']:.2f}")
    print(f"full detect on {r['sizes'][-1]}: {r['full_run_seconds']:.2f}s, "
          f"{r['full_run_candidates']} candidates, {r['full_run_events']} events")


if __name__ == "__main__":
    main()
