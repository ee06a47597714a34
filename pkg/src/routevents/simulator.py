"""Deterministic network simulator with ground-truth physical events.

Routing is hop-count shortest path toward the destination, ties broken by
the lexicographically smallest next hop.  A sample taken at time ``ts``
sees every event with ``at < ts`` (shifted by the probe's optional
convergence delay).
"""

from __future__ import annotations

import bisect
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence, TextIO

from .detector import InferredEvent
from .model import AnalysisError, Address, EventType, SdPair, TraceroutePath, canon
from .pathdiff import Transition, diff_paths


class SimulationError(AnalysisError):
    pass


def link(u: Address, v: Address) -> tuple[Address, Address]:
    if u == v:
        raise SimulationError("SELF_LOOP", u)
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Topology:
    vertices: frozenset[Address]
    edges: frozenset[tuple[Address, Address]]
    probes: tuple[SdPair, ...] = ()
    balancers: frozenset[Address] = frozenset()

    @classmethod
    def build(cls, edges: Iterable[tuple[Address, Address]], probes=(),
              balancers=(), vertices=()) -> "Topology":
        es = frozenset(link(u, v) for u, v in edges)
        vs = frozenset(vertices) | {x for e in es for x in e}
        vs |= {x for p in probes for x in (p.source, p.destination)}
        return cls(vs, es, tuple(sorted(probes)), frozenset(balancers))

    @cached_property
    def adjacency(self) -> dict[Address, tuple[Address, ...]]:
        adj: dict[Address, list] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def connected(self, u: Address, v: Address) -> bool:
        return v in _bfs(self.adjacency, u)


def _bfs(adj, root) -> dict[Address, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def route(topology: Topology, src: Address, dst: Address, balance: int = 0,
          _dist_cache: Optional[dict] = None) -> tuple[Address, ...]:
    """Shortest hop-count path, smallest next hop first.

    When ``dst`` is unreachable the path ends at the farthest vertex
    reachable from ``src`` (smallest label among equals).  At balancer
    vertices the ``balance``-th equal-cost next hop is taken instead.
    """
    adj = topology.adjacency
    if src not in adj or dst not in adj:
        raise SimulationError("UNKNOWN_VERTEX", f"{src} or {dst}")

    def dist_to(target):
        if _dist_cache is None:
            return _bfs(adj, target)
        if target not in _dist_cache:
            _dist_cache[target] = _bfs(adj, target)
        return _dist_cache[target]

    target = dst
    dist = dist_to(dst)
    if src not in dist:
        reach = _bfs(adj, src)
        far = max(reach.values())
        target = min(v for v, d in reach.items() if d == far)
        dist = dist_to(target)
    path = [src]
    v = src
    while v != target:
        step = [w for w in adj[v] if dist.get(w) == dist[v] - 1]
        v = step[balance % len(step)] if v in topology.balancers else step[0]
        path.append(v)
    return tuple(path)


@dataclass(frozen=True)
class PhysicalEvent:
    at: float
    direction: EventType  # DOWN or UP
    links: frozenset[tuple[Address, Address]]

    @classmethod
    def make(cls, at: float, direction, links) -> "PhysicalEvent":
        ev = cls(float(at), EventType(direction), frozenset(link(*l) for l in links))
        ev.hubs  # validates
        return ev

    @property
    def hubs(self) -> frozenset[Address]:
        if self.direction is EventType.UNKNOWN:
            raise SimulationError("BAD_DIRECTION", "physical events are down or up")
        if not self.links:
            raise SimulationError("NO_LINKS")
        common = frozenset.intersection(*(frozenset(l) for l in self.links))
        if not common:
            raise SimulationError("NO_COMMON_HUB", str(sorted(self.links)))
        return common


def apply_event(topology: Topology, event: PhysicalEvent) -> Topology:
    event.hubs
    if event.direction is EventType.DOWN:
        missing = event.links - topology.edges
        if missing:
            raise SimulationError("LINK_NOT_PRESENT", str(sorted(missing)))
        edges = topology.edges - event.links
    else:
        present = event.links & topology.edges
        if present:
            raise SimulationError("LINK_ALREADY_PRESENT", str(sorted(present)))
        edges = topology.edges | event.links
    vertices = topology.vertices | {x for l in event.links for x in l}
    return Topology(vertices, edges, topology.probes, topology.balancers)


@dataclass(frozen=True)
class SampleSpec:
    start: float
    period: float
    jitter: float = 0.0
    delay: float = 0.0  # convergence delay; 0 for property-checking runs

    def __post_init__(self):
        if self.period <= 0:
            raise SimulationError("BAD_SCHEDULE", f"period {self.period}")
        if not 0 <= self.jitter < self.period / 2:
            raise SimulationError("BAD_SCHEDULE", f"jitter {self.jitter}")


@dataclass(frozen=True)
class Schedule:
    samples: dict  # probe_id -> SampleSpec
    horizon: float


@dataclass(frozen=True)
class GroundTruth:
    at: float
    direction: EventType
    hubs: frozenset[Address]
    scope: frozenset[SdPair]
    links: frozenset = frozenset()

    @property
    def visible(self) -> bool:
        return bool(self.scope)


def _routes(topology: Topology, balance: int = 0) -> dict[SdPair, tuple]:
    cache: dict = {}
    return {p: route(topology, p.source, p.destination, balance, cache)
            for p in topology.probes}


def group_truth(before: Topology, group: Sequence[PhysicalEvent]
                ) -> tuple[Topology, list[GroundTruth]]:
    """Apply simultaneous events and attribute route changes to each.

    Raises ``INTERFERING_EVENTS`` when scopes overlap, when a combined
    route differs from the event's own effect, or when changed portions of
    pairs in different scopes share vertices.
    """
    r0 = _routes(before)
    after = before
    for e in group:
        after = apply_event(after, e)
    r1 = _routes(after)
    if len(group) == 1:
        scope = frozenset(p for p in r0 if r0[p] != r1[p])
        e = group[0]
        return after, [GroundTruth(e.at, e.direction, e.hubs, scope, e.links)]

    truths = []
    for e in group:
        solo = _routes(apply_event(before, e))
        scope = frozenset(p for p in r0 if solo[p] != r0[p])
        if any(solo[p] != r1[p] for p in scope):
            raise SimulationError("INTERFERING_EVENTS", f"t={e.at}: combined routes differ")
        truths.append(GroundTruth(e.at, e.direction, e.hubs, scope, e.links))
    changed = {p for p in r0 if r0[p] != r1[p]}
    if changed != set().union(*(t.scope for t in truths)):
        raise SimulationError("INTERFERING_EVENTS", f"t={group[0].at}: unattributed change")
    diffs = {p: diff_paths(r0[p], r1[p]) for p in changed}
    for t1, t2 in combinations(truths, 2):
        if t1.scope & t2.scope:
            raise SimulationError("INTERFERING_EVENTS", f"t={t1.at}: overlapping scopes")
        for i in t1.scope:
            for j in t2.scope:
                di, dj = diffs[i], diffs[j]
                if set(di.delta_pre) & set(dj.delta_pre) or set(di.delta_post) & set(dj.delta_post):
                    raise SimulationError("INTERFERING_EVENTS",
                                          f"t={t1.at}: deltas of {i} and {j} intersect")
    return after, truths


def event_groups(events: Iterable[PhysicalEvent]) -> list[list[PhysicalEvent]]:
    groups: list[list[PhysicalEvent]] = []
    for e in events:
        if groups and e.at < groups[-1][0].at:
            raise SimulationError("UNSORTED_EVENTS", f"{e.at} after {groups[-1][0].at}")
        if groups and e.at == groups[-1][0].at:
            groups[-1].append(e)
        else:
            groups.append([e])
    return groups


def sample_times(spec: SampleSpec, horizon: float, rng: random.Random) -> list[float]:
    times = []
    k = 0
    while spec.start + k * spec.period <= horizon:
        base = spec.start + k * spec.period
        jitter = rng.uniform(-spec.jitter, spec.jitter) if spec.jitter else 0.0
        times.append(round(base + jitter, 3))
        k += 1
    return times


def generate(topology: Topology, schedule: Schedule, events: Sequence[PhysicalEvent],
             seed: int) -> tuple[list[TraceroutePath], list[GroundTruth]]:
    """Synthetic traceroutes plus the ground truth of every event.

    Output is in canonical (sd-pair, timestamp) order and depends only on
    the inputs and ``seed``.
    """
    groups = event_groups(events)
    states = [topology]
    truths: list[GroundTruth] = []
    for g in groups:
        after, ts = group_truth(states[-1], g)
        states.append(after)
        truths.extend(ts)
    times = [g[0].at for g in groups]
    caches = [dict() for _ in states]

    paths = []
    for pair in topology.probes:
        spec = schedule.samples.get(pair.probe_id)
        if spec is None:
            continue
        rng = random.Random(f"{seed}/{pair.probe_id}")
        for k, ts in enumerate(sample_times(spec, schedule.horizon, rng)):
            idx = bisect.bisect_left(times, ts - spec.delay)
            balance = k if topology.balancers else 0
            hops = route(states[idx], pair.source, pair.destination, balance, caches[idx])
            paths.append(TraceroutePath(pair, ts, hops))
    return paths, truths


def check_event_on_path(transitions: Iterable[Transition],
                        truths: Sequence[GroundTruth]) -> list[Transition]:
    """Transitions whose deltas contain no link of any event in the
    direction it happened; empty when every change is explained."""
    down = {l for t in truths if t.direction is EventType.DOWN for l in t.links}
    up = {l for t in truths if t.direction is EventType.UP for l in t.links}
    bad = []
    for tr in transitions:
        d = tr.diff
        pre = {link(u, v) for u, v in zip(d.delta_pre, d.delta_pre[1:])}
        post = {link(u, v) for u, v in zip(d.delta_post, d.delta_post[1:])}
        if not (pre & down or post & up):
            bad.append(tr)
    return bad


# -- validation ------------------------------------------------------------


@dataclass
class ValidationReport:
    visible: int
    inferred: int
    matched_truth: int
    scope_exact: int
    matched_inferred: int
    type_correct: int
    unmatched_truth: list = field(default_factory=list)
    unmatched_inferred: list = field(default_factory=list)

    @staticmethod
    def _ratio(a, b):
        return a / b if b else 1.0

    @property
    def completeness(self) -> float:
        return self._ratio(self.matched_truth, self.visible)

    @property
    def scope_exactness(self) -> float:
        return self._ratio(self.scope_exact, self.visible)

    @property
    def correctness(self) -> float:
        return self._ratio(self.matched_inferred, self.inferred)

    @property
    def type_accuracy(self) -> float:
        return self._ratio(self.type_correct, self.matched_inferred)

    def as_dict(self) -> dict:
        return {
            "visible": self.visible, "inferred": self.inferred,
            "completeness": self.completeness, "scope_exactness": self.scope_exactness,
            "correctness": self.correctness, "type_accuracy": self.type_accuracy,
            "unmatched_truth": len(self.unmatched_truth),
            "unmatched_inferred": len(self.unmatched_inferred),
        }


def matches(e: InferredEvent, t: GroundTruth) -> bool:
    return e.interval.contains(t.at) and bool(e.addresses & t.hubs)


def validate_inference(inferred: Sequence[InferredEvent],
                       truths: Sequence[GroundTruth]) -> ValidationReport:
    visible = [t for t in truths if t.visible]
    rep = ValidationReport(len(visible), len(inferred), 0, 0, 0, 0)
    for t in visible:
        hits = [e for e in inferred if matches(e, t)]
        if hits:
            rep.matched_truth += 1
            rep.scope_exact += any(e.scope == t.scope for e in hits)
        else:
            rep.unmatched_truth.append(t)
    for e in inferred:
        hits = [t for t in visible if matches(e, t)]
        if not hits:
            rep.unmatched_inferred.append(e)
            continue
        rep.matched_inferred += 1
        best = min(hits, key=lambda t: (len(e.scope ^ t.scope), abs(e.interval.midpoint - t.at)))
        rep.type_correct += e.type is best.direction
    return rep


# -- file formats ----------------------------------------------------------


def _lines(stream: TextIO):
    for lineno, line in enumerate(stream, 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_topology(stream: TextIO) -> Topology:
    """``edge <a> <b>``, ``probe <id> <src> <dst>`` and ``balancer <v>`` lines."""
    edges, probes, balancers = [], [], []
    for lineno, f in _lines(stream):
        try:
            if f[0] == "edge" and len(f) == 3:
                edges.append((canon(f[1]), canon(f[2])))
            elif f[0] == "probe" and len(f) == 4:
                probes.append(SdPair(f[1], canon(f[3]), canon(f[2])))
            elif f[0] == "balancer" and len(f) == 2:
                balancers.append(canon(f[1]))
            else:
                raise ValueError(" ".join(f))
        except ValueError as exc:
            raise SimulationError("MALFORMED", f"topology line {lineno}: {exc}") from None
    return Topology.build(edges, probes, balancers)


def parse_links(text: str) -> list[tuple[str, str]]:
    out = []
    for chunk in text.split(";"):
        u, v = chunk.split(",")
        out.append((canon(u), canon(v)))
    return out


def parse_schedule(stream: TextIO) -> tuple[Schedule, list[PhysicalEvent], Optional[int]]:
    """Schedule/events file.

    Lines: ``event <t> <down|up> <u,v>[;<u,v>...]``,
    ``sample <probe-id> <start> <period> [jitter]``, ``delay <probe-id> <s>``,
    ``horizon <t>`` and ``seed <n>``.
    """
    events, specs, delays = [], {}, {}
    horizon = seed = None
    for lineno, f in _lines(stream):
        try:
            if f[0] == "event" and len(f) == 4:
                events.append(PhysicalEvent.make(float(f[1]), f[2], parse_links(f[3])))
            elif f[0] == "sample" and len(f) in (4, 5):
                specs[f[1]] = (float(f[2]), float(f[3]), float(f[4]) if len(f) == 5 else 0.0)
            elif f[0] == "delay" and len(f) == 3:
                delays[f[1]] = float(f[2])
            elif f[0] == "horizon" and len(f) == 2:
                horizon = float(f[1])
            elif f[0] == "seed" and len(f) == 2:
                seed = int(f[1])
            else:
                raise ValueError(" ".join(f))
        except SimulationError:
            raise
        except ValueError as exc:
            raise SimulationError("MALFORMED", f"schedule line {lineno}: {exc}") from None
    samples = {pid: SampleSpec(s, p, j, delays.get(pid, 0.0)) for pid, (s, p, j) in specs.items()}
    if horizon is None:
        marks = [e.at for e in events] + [s.start for s in samples.values()] + [0.0]
        periods = [s.period for s in samples.values()] or [1.0]
        horizon = max(marks) + 10 * max(periods)
    events.sort(key=lambda e: e.at)
    return Schedule(samples, horizon), events, seed


def truth_line(t: GroundTruth) -> str:
    scope = sorted(p.ident for p in t.scope)
    return " ".join(["truth", repr(t.at), t.direction.value, ",".join(sorted(t.hubs)),
                     str(len(scope))] + scope)


def write_truth(truths: Iterable[GroundTruth], out: TextIO):
    for t in truths:
        out.write(truth_line(t) + "\n")


def read_truth(stream: TextIO) -> list[GroundTruth]:
    out = []
    for lineno, f in _lines(stream):
        try:
            if f[0] != "truth" or len(f) < 5 or len(f) != 5 + int(f[4]):
                raise ValueError(" ".join(f))
            out.append(GroundTruth(float(f[1]), EventType(f[2]), frozenset(f[3].split(",")),
                                   frozenset(SdPair.from_ident(s) for s in f[5:])))
        except (ValueError, AnalysisError) as exc:
            raise SimulationError("MALFORMED", f"truth line {lineno}: {exc}") from None
    return out
