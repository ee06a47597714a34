"""Three-phase routing event inference.

Phase 1 extracts per-pair transitions, phase 2 sweeps transition endpoints
tracking, for every extended address, the set of sd-pairs whose active
transition contains it, and reports a candidate whenever that set hits a
local maximum in size.  Phase 3 drops candidates subsumed by an
overlapping larger one and groups the rest into inferred events.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import (
    Address,
    EventType,
    ExtendedAddress,
    Interval,
    PathError,
    SdPair,
    Tag,
    TraceroutePath,
    validate_path,
)
from .pathdiff import Transition, find_transitions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateEvent:
    interval: Interval  # closed
    pairs: frozenset[SdPair]
    address: ExtendedAddress

    def sort_key(self):
        return (self.interval.start, self.interval.end,
                sorted(p.ident for p in self.pairs), self.address)


@dataclass(frozen=True)
class InferredEvent:
    interval: Interval
    scope: frozenset[SdPair]
    addresses: frozenset[Address]
    type: EventType

    @property
    def impact(self) -> int:
        return len(self.scope)

    def sort_key(self):
        return (self.interval.start, self.interval.end,
                sorted(p.ident for p in self.scope), sorted(self.addresses))


@dataclass
class RunStats:
    paths: int = 0
    accepted_paths: int = 0
    rejected: Counter = field(default_factory=Counter)
    pairs: int = 0
    transitions: int = 0
    candidates: int = 0
    pruned: int = 0
    events: int = 0
    skipped: Counter = field(default_factory=Counter)
    phase_seconds: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "paths": self.paths,
            "accepted_paths": self.accepted_paths,
            "rejected_paths": sum(self.rejected.values()),
            "rejected": dict(sorted(self.rejected.items())),
            "pairs": self.pairs,
            "transitions": self.transitions,
            "candidates": self.candidates,
            "pruned_candidates": self.pruned,
            "events": self.events,
            "skipped": dict(sorted(self.skipped.items())),
            "phase_seconds": self.phase_seconds,
        }


# -- phase 1 ---------------------------------------------------------------


def group_paths(paths: Iterable[TraceroutePath],
                stats: Optional[RunStats] = None) -> dict[SdPair, list[TraceroutePath]]:
    """Validate and group paths by sd-pair, each series sorted by time.

    Invalid paths and repeated (pair, timestamp) samples are counted in
    ``stats.rejected`` and dropped.
    """
    stats = stats if stats is not None else RunStats()
    series: dict[SdPair, dict[float, TraceroutePath]] = defaultdict(dict)
    for p in paths:
        stats.paths += 1
        try:
            validate_path(p)
        except PathError as exc:
            stats.rejected[exc.code] += 1
            continue
        if p.timestamp in series[p.pair]:
            stats.rejected["DUPLICATE_TIMESTAMP"] += 1
            continue
        series[p.pair][p.timestamp] = p
        stats.accepted_paths += 1
    return {pair: [s[t] for t in sorted(s)]
            for pair, s in sorted(series.items(), key=lambda kv: kv[0].key)}


def extract_transitions(series: dict[SdPair, list[TraceroutePath]], threads: int = 1,
                        stats: Optional[RunStats] = None) -> list[Transition]:
    stats = stats if stats is not None else RunStats()
    pairs = sorted(series, key=lambda p: p.key)

    def work(pair):
        c = Counter()
        return find_transitions(series[pair], c), c

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, pairs))
    else:
        results = [work(p) for p in pairs]
    out = []
    for ts, c in results:
        out.extend(ts)
        stats.skipped.update(c)
    return out


# -- phase 2 ---------------------------------------------------------------


def _timeline(transitions: Sequence[Transition]):
    """Distinct endpoints in ascending order, each with the transitions ending
    and starting there as ``(pair index, changed set)``; plus the pair table."""
    index: dict[SdPair, int] = {}
    starts = defaultdict(list)
    ends = defaultdict(list)
    for t in transitions:
        i = index.setdefault(t.pair, len(index))
        starts[t.interval.start].append((i, t.changed_set))
        ends[t.interval.end].append((i, t.changed_set))
    timeline = [(x, ends.get(x, ()), starts.get(x, ()))
                for x in sorted(starts.keys() | ends.keys())]
    return timeline, list(index)


class _Tracked:
    """Current pair set of one extended address and its size history."""

    __slots__ = ("members", "t", "t_prev", "size_prev", "size_pprev")

    def __init__(self):
        self.members: set[int] = set()
        self.t = -math.inf
        self.t_prev = -math.inf
        self.size_prev = 0
        self.size_pprev = 0


def _sweep(timeline, pairs: list[SdPair],
           wanted: Optional[frozenset] = None) -> list[CandidateEvent]:
    # sets hold pair indices; pairs are decoded only for emitted candidates
    tracked: dict[ExtendedAddress, _Tracked] = defaultdict(_Tracked)
    out = []
    for instant, ending, starting in timeline:
        removed: dict[ExtendedAddress, set] = defaultdict(set)
        added: dict[ExtendedAddress, set] = defaultdict(set)
        for i, cs in ending:
            for a in cs:
                if wanted is None or a in wanted:
                    removed[a].add(i)
        for i, cs in starting:
            for a in cs:
                if wanted is None or a in wanted:
                    added[a].add(i)
        for a in removed.keys() | added.keys():
            r, s = removed.get(a, set()), added.get(a, set())
            gone, new = r - s, s - r
            if not gone and not new:
                continue  # a pair's consecutive transitions both carry a
            st = tracked[a]
            old_size = len(st.members)
            new_size = old_size - len(gone) + len(new)
            snapshot = None
            if st.size_prev <= old_size and old_size > new_size:
                snapshot = frozenset(pairs[i] for i in st.members)
            st.members -= gone
            st.members |= new
            st.size_pprev, st.size_prev = st.size_prev, old_size
            st.t_prev, st.t = st.t, instant
            if snapshot is not None:
                out.append(CandidateEvent(Interval(st.t_prev, instant), snapshot, a))
    return out


def sweep_candidates(transitions: Sequence[Transition], threads: int = 1) -> list[CandidateEvent]:
    """Candidate events from a set of transitions, in canonical order.

    Equal endpoints are coalesced into a single sweep instant.  Tracked
    sets only change at endpoints of transitions that carry their address,
    so each address is updated only when touched.
    """
    timeline, pairs = _timeline(transitions)
    if threads > 1:
        addresses = sorted({a for t in transitions for a in t.changed_set})
        chunks = [frozenset(addresses[i::threads]) for i in range(threads)]
        chunks = [c for c in chunks if c]
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda c: _sweep(timeline, pairs, c), chunks))
        cands = [c for part in parts for c in part]
    else:
        cands = _sweep(timeline, pairs)
    return sorted(cands, key=CandidateEvent.sort_key)


# -- phase 3 ---------------------------------------------------------------


def prune_subsumed(cands: Sequence[CandidateEvent]) -> list[CandidateEvent]:
    """Drop every candidate whose pairs are a strict subset of those of a
    time-overlapping candidate (closed intervals; judged on the input set)."""
    order = sorted(range(len(cands)), key=lambda i: cands[i].interval.start)
    dead = set()
    for pos, i in enumerate(order):
        ci = cands[i]
        for j in order[pos + 1:]:
            cj = cands[j]
            if cj.interval.start > ci.interval.end:
                break
            if cj.interval.end < ci.interval.start:
                continue
            if ci.pairs < cj.pairs:
                dead.add(i)
            elif cj.pairs < ci.pairs:
                dead.add(j)
    return [c for k, c in enumerate(cands) if k not in dead]


def group_and_infer(cands: Iterable[CandidateEvent], threshold: int = 0) -> list[InferredEvent]:
    groups: dict[tuple, set[ExtendedAddress]] = defaultdict(set)
    for c in cands:
        groups[(c.pairs, c.interval)].add(c.address)
    events = []
    for (pairs, interval), eaddr in groups.items():
        if len(pairs) <= threshold:
            continue
        tags = {a.tag for a in eaddr}
        if tags == {Tag.PRE}:
            kind = EventType.DOWN
        elif tags == {Tag.POST}:
            kind = EventType.UP
        else:
            kind = EventType.UNKNOWN
        events.append(InferredEvent(interval, pairs,
                                    frozenset(a.address for a in eaddr), kind))
    return sorted(events, key=InferredEvent.sort_key)


# -- pipeline --------------------------------------------------------------


def infer_from_transitions(transitions: Sequence[Transition], threshold: int = 0,
                           threads: int = 1, stats: Optional[RunStats] = None
                           ) -> list[InferredEvent]:
    stats = stats if stats is not None else RunStats()
    t0 = time.perf_counter()
    cands = sweep_candidates(transitions, threads)
    t1 = time.perf_counter()
    kept = prune_subsumed(cands)
    events = group_and_infer(kept, threshold)
    t2 = time.perf_counter()
    stats.transitions = len(transitions)
    stats.candidates = len(cands)
    stats.pruned = len(cands) - len(kept)
    stats.events = len(events)
    stats.phase_seconds["phase2"] = t1 - t0
    stats.phase_seconds["phase3"] = t2 - t1
    return events


def detect_events(paths: Iterable[TraceroutePath], threshold: int = 0,
                  threads: int = 1) -> tuple[list[InferredEvent], RunStats]:
    """Run the full pipeline on raw paths.

    Rejected paths are counted in the returned stats, never raised.
    """
    stats = RunStats()
    t0 = time.perf_counter()
    series = group_paths(paths, stats)
    stats.pairs = len(series)
    transitions = extract_transitions(series, threads, stats)
    stats.phase_seconds["phase1"] = time.perf_counter() - t0
    events = infer_from_transitions(transitions, threshold, threads, stats)
    log.info("%d paths, %d transitions, %d candidates, %d events",
             stats.paths, stats.transitions, stats.candidates, stats.events)
    return events, stats
