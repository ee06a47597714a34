"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 I/O, 3 data errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import balancers, ingest, simulator
from .detector import InferredEvent, RunStats, detect_events, extract_transitions, group_paths
from .empathy import build_empathy_graph, to_dot
from .model import AnalysisError, Tag

log = logging.getLogger("routevents")

EXIT_USAGE, EXIT_IO, EXIT_DATA = 1, 2, 3


@dataclass
class Config:
    threshold: int = 10
    lb_clean: bool = True
    lb_instability: float = balancers.DEFAULT_INSTABILITY
    input_format: str = "internal"
    threads: int = 1
    seed: Optional[int] = None


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def _read_paths(path: str, fmt: str):
    with open(path, encoding="utf-8") as fh:
        if fmt == "atlas":
            return ingest.parse_atlas(fh)
        return ingest.parse_internal(fh)


def _config(args) -> Config:
    return Config(
        threshold=getattr(args, "threshold", Config.threshold),
        lb_clean=getattr(args, "lb_clean", Config.lb_clean),
        lb_instability=getattr(args, "lb_instability", Config.lb_instability),
        input_format=getattr(args, "format", Config.input_format),
        threads=getattr(args, "threads", Config.threads),
        seed=getattr(args, "seed", None),
    )


def _load_and_clean(args, cfg: Config, extra: dict):
    paths, istats = _read_paths(args.input, cfg.input_format)
    extra["ingest"] = {"records": istats.records, "accepted": istats.accepted,
                       "rejected": dict(sorted(istats.rejected.items())),
                       "notes": dict(sorted(istats.notes.items()))}
    if cfg.lb_clean:
        paths, bmap, nstats, rejected = balancers.clean(paths, cfg.lb_instability)
        extra["lb_clean"] = {"balancers": len(bmap), "rejected": dict(rejected)}
        if getattr(args, "balancers_out", None):
            with open(args.balancers_out, "w", encoding="utf-8") as fh:
                balancers.write_balancers(bmap, nstats, fh)
    return paths


def cmd_detect(args) -> int:
    cfg = _config(args)
    extra: dict = {}
    paths = _load_and_clean(args, cfg, extra)
    events, stats = detect_events(paths, cfg.threshold, cfg.threads)
    with _open_out(args.output) as out:
        ingest.write_events(events, out)
    if args.stats:
        report = {"config": asdict(cfg), **extra, **stats.as_dict()}
        with open(args.stats, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    log.info("%d events written", len(events))
    return 0


def cmd_clean(args) -> int:
    cfg = _config(args)
    cfg.lb_clean = True
    extra: dict = {}
    paths = _load_and_clean(args, cfg, extra)
    with _open_out(args.output) as out:
        ingest.write_traces(paths, out)
    log.info("clean: %s", extra.get("lb_clean"))
    return 0


def cmd_simulate(args) -> int:
    with open(args.topology, encoding="utf-8") as fh:
        topo = simulator.parse_topology(fh)
    with open(args.schedule, encoding="utf-8") as fh:
        schedule, events, file_seed = simulator.parse_schedule(fh)
    seed = args.seed if args.seed is not None else file_seed
    if seed is None:
        raise UsageError("a seed is required (--seed or a 'seed' line in the schedule)")
    paths, truths = simulator.generate(topo, schedule, events, seed)
    with _open_out(args.output) as out:
        ingest.write_traces(paths, out)
    with open(args.truth, "w", encoding="utf-8") as fh:
        simulator.write_truth(truths, fh)
    return 0


def cmd_validate(args) -> int:
    with open(args.events, encoding="utf-8") as fh:
        events = ingest.read_events(fh)
    with open(args.truth, encoding="utf-8") as fh:
        truths = simulator.read_truth(fh)
    rep = simulator.validate_inference(events, truths)
    print(f"visible events:   {rep.visible}")
    print(f"inferred events:  {rep.inferred}")
    print(f"completeness:     {rep.completeness:.3f}")
    print(f"scope exactness:  {rep.scope_exactness:.3f}")
    print(f"correctness:      {rep.correctness:.3f}")
    print(f"type accuracy:    {rep.type_accuracy:.3f}")
    print(json.dumps(rep.as_dict(), sort_keys=True))
    return 0


def cmd_graph(args) -> int:
    cfg = _config(args)
    extra: dict = {}
    paths = _load_and_clean(args, cfg, extra)
    stats = RunStats()
    transitions = extract_transitions(group_paths(paths, stats), cfg.threads, stats)
    if transitions:
        lo = min(t.interval.start for t in transitions)
        hi = max(t.interval.end for t in transitions)
        if not lo <= args.at <= hi:
            log.warning("--at %s is outside the data range [%s, %s]", args.at, lo, hi)
    g = build_empathy_graph(transitions, args.at, Tag(args.kind))
    if not g.vertices:
        log.warning("NO_ACTIVE_TRANSITIONS at %s; emitting an empty graph", args.at)
    with _open_out(args.output) as out:
        out.write(to_dot(g))
    return 0


def address_set_id(addresses) -> str:
    return hashlib.sha1(",".join(sorted(addresses)).encode()).hexdigest()[:10]


def write_report(events: Sequence[InferredEvent], out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["midpoint", "impact", "address_set_id", "type"])
    for e in sorted(events, key=InferredEvent.sort_key):
        w.writerow([f"{e.interval.midpoint:.3f}", e.impact, address_set_id(e.addresses),
                    e.type.value])


def cmd_report(args) -> int:
    with open(args.events, encoding="utf-8") as fh:
        events = ingest.read_events(fh)
    with _open_out(args.output) as out:
        write_report(events, out)
    return 0


def _add_cleanup(p):
    p.add_argument("input", help="trace file")
    p.add_argument("--format", choices=["internal", "atlas"], default=Config.input_format,
                   help="input format (default: %(default)s)")
    p.add_argument("--no-lb-clean", dest="lb_clean", action="store_false",
                   help="skip load-balancer cleanup (default: cleanup on)")
    p.add_argument("--lb-instability", type=float, default=Config.lb_instability,
                   help="next-hop change ratio above which a node is a balancer "
                        "(default: %(default)s)")
    p.add_argument("--balancers-out", help="write detected balancers to this file")
    p.add_argument("--threads", type=int, default=Config.threads,
                   help="worker threads (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="routevents",
                     description="Infer routing events from traceroute measurements.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="infer events from traces")
    _add_cleanup(p)
    p.add_argument("--threshold", type=int, default=Config.threshold,
                   help="report events with impact above this (default: %(default)s)")
    p.add_argument("-o", "--output", default="-", help="event file (default: stdout)")
    p.add_argument("--stats", help="write run statistics (JSON) here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("clean", help="rewrite load-balancer next hops")
    _add_cleanup(p)
    p.add_argument("-o", "--output", default="-", help="cleaned trace file (default: stdout)")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("simulate", help="generate traces with ground truth")
    p.add_argument("--topology", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--seed", type=int, help="overrides a 'seed' line in the schedule")
    p.add_argument("-o", "--output", default="-", help="trace file (default: stdout)")
    p.add_argument("--truth", required=True, help="ground-truth file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="score inferred events against ground truth")
    p.add_argument("events")
    p.add_argument("truth")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="empathy graph at an instant, as DOT")
    _add_cleanup(p)
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--kind", choices=["pre", "post"], default="pre")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("report", help="CSV of event midpoints and impacts")
    p.add_argument("events")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    if getattr(args, "threshold", 0) < 0:
        parser.error("--threshold must be non-negative")
    if not 0 < getattr(args, "lb_instability", 0.5) < 1:
        parser.error("--lb-instability must be in (0, 1)")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"routevents: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"routevents: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AnalysisError as exc:
        print(f"routevents: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
