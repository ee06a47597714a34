"""Reading and writing traces and inferred events.

Internal trace format: one JSON object per line,
``{"probe": .., "src": .., "dst": .., "ts": .., "hops": [..]}``, where
``hops`` starts at the source and ``"*"`` marks an unresponsive hop.

Event format: one tab-separated record per line::

    event  <t1>  <t2>  <type>  <impact>  <addr,addr,..>  <probe→dst,..>

with times at fixed 3 decimals and both lists sorted.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .detector import InferredEvent
from .model import (
    AnalysisError,
    EventType,
    Interval,
    PathError,
    SdPair,
    TraceroutePath,
    canon,
    validate_path,
)

log = logging.getLogger(__name__)

STAR = "*"


class FormatError(AnalysisError):
    pass


@dataclass
class IngestStats:
    records: int = 0
    accepted: int = 0
    rejected: Counter = field(default_factory=Counter)
    notes: Counter = field(default_factory=Counter)

    def reject(self, code: str, lineno: int, detail: str = ""):
        self.rejected[code] += 1
        log.warning("record %d rejected: %s %s", lineno, code, detail)


def normalize(hops: Sequence[str]) -> tuple[str, ...]:
    """Drop unresponsive hops and canonicalize the rest."""
    out = tuple(canon(h) for h in hops if h.strip() != STAR)
    if not out:
        raise PathError("EMPTY", "no responsive hop")
    return out


def _accept(path_pair: SdPair, ts: float, raw_hops, stats: IngestStats,
            seen: set, lineno: int, out: list):
    try:
        hops = normalize(raw_hops)
        path = validate_path(TraceroutePath(path_pair, ts, hops))
    except PathError as exc:
        stats.reject(exc.code, lineno)
        return
    key = (path_pair, ts)
    if key in seen:
        stats.reject("DUPLICATE_TIMESTAMP", lineno)
        return
    seen.add(key)
    stats.accepted += 1
    out.append(path)


def _records(stream: TextIO):
    for lineno, line in enumerate(stream, 1):
        if line.strip():
            yield lineno, line


def _canonical_order(paths: list[TraceroutePath]) -> list[TraceroutePath]:
    return sorted(paths, key=lambda p: (p.pair.key, p.timestamp))


def parse_internal(stream: TextIO) -> tuple[list[TraceroutePath], IngestStats]:
    stats = IngestStats()
    out: list[TraceroutePath] = []
    seen: set = set()
    for lineno, line in _records(stream):
        stats.records += 1
        try:
            rec = json.loads(line)
            probe, src, dst = str(rec["probe"]), canon(rec["src"]), canon(rec["dst"])
            ts = float(rec["ts"])
            hops = [str(h) for h in rec["hops"]]
            if not probe or ts != ts:
                raise ValueError("empty probe id or NaN timestamp")
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            stats.reject("MALFORMED", lineno, str(exc))
            continue
        _accept(SdPair(probe, dst, src), ts, hops, stats, seen, lineno, out)
    return _canonical_order(out), stats


def write_traces(paths: Iterable[TraceroutePath], out: TextIO):
    for p in _canonical_order(list(paths)):
        rec = {"probe": p.pair.probe_id, "src": p.pair.source or p.hops[0],
               "dst": p.pair.destination, "ts": p.timestamp, "hops": list(p.hops)}
        out.write(json.dumps(rec) + "\n")


def _atlas_hop(hop: dict, stats: IngestStats) -> str:
    replies = [r["from"] for r in hop.get("result", ()) if isinstance(r, dict) and "from" in r]
    if not replies:
        return STAR
    if len(set(replies)) > 1:
        stats.notes["hop_reply_disagreement"] += 1
    return replies[0]


def _atlas_records(stream: TextIO):
    text = stream.read()
    if text.lstrip().startswith("["):
        try:
            data = json.loads(text)
        except ValueError:
            yield 1, None
            return
        for i, rec in enumerate(data, 1):
            yield i, rec
        return
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except ValueError:
            yield lineno, None


def parse_atlas(stream: TextIO) -> tuple[list[TraceroutePath], IngestStats]:
    """RIPE-Atlas-style traceroute results (JSON array or JSON lines).

    Each record needs ``prb_id``, ``dst_addr``, ``timestamp``, a source in
    ``src_addr`` (or ``from``) and a ``result`` list of hops whose replies
    carry ``from``.  The first reply of each hop is used.
    """
    stats = IngestStats()
    out: list[TraceroutePath] = []
    seen: set = set()
    for lineno, rec in _atlas_records(stream):
        stats.records += 1
        try:
            if not isinstance(rec, dict):
                raise ValueError("not a JSON object")
            probe = str(rec["prb_id"])
            dst = canon(rec["dst_addr"])
            src = canon(rec.get("src_addr") or rec["from"])
            ts = float(rec["timestamp"])
            hops = [src] + [_atlas_hop(h, stats) for h in rec["result"]]
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            stats.reject("MALFORMED", lineno, str(exc))
            continue
        _accept(SdPair(probe, dst, src), ts, hops, stats, seen, lineno, out)
    return _canonical_order(out), stats


def event_line(e: InferredEvent) -> str:
    for a in e.addresses:
        if "," in a or "\t" in a:
            raise ValueError(f"address {a!r} cannot be serialized")
    scope = sorted(p.ident for p in e.scope)
    return "\t".join([
        "event", f"{e.interval.start:.3f}", f"{e.interval.end:.3f}", e.type.value,
        str(e.impact), ",".join(sorted(e.addresses)), ",".join(scope),
    ])


def write_events(events: Iterable[InferredEvent], out: TextIO):
    for e in sorted(events, key=InferredEvent.sort_key):
        out.write(event_line(e) + "\n")


def read_events(stream: TextIO) -> list[InferredEvent]:
    events = []
    for lineno, line in _records(stream):
        fields = line.rstrip("\n").split("\t")
        try:
            if len(fields) != 7 or fields[0] != "event":
                raise ValueError("expected 7 tab-separated fields")
            _, t1, t2, kind, impact, addrs, scope = fields
            pairs = frozenset(SdPair.from_ident(s) for s in scope.split(","))
            ev = InferredEvent(Interval(float(t1), float(t2)), pairs,
                               frozenset(addrs.split(",")), EventType(kind))
            if ev.impact != int(impact):
                raise ValueError("impact does not match scope size")
        except (ValueError, AnalysisError) as exc:
            raise FormatError("MALFORMED", f"line {lineno}: {exc}") from None
        events.append(ev)
    return events
