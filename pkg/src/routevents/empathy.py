"""Empathy relations, empathy graphs and pivot sets.

This is an analysis and verification surface: the detector never builds
graphs explicitly.  ``check_event_instant`` turns the structural properties
about empathy graphs into executable checks against known events.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .model import Address, AnalysisError, SdPair, Tag
from .pathdiff import Transition


class EmpathyError(AnalysisError):
    pass


def _check_overlap(t1: Transition, t2: Transition):
    if not t1.interval.overlaps_open(t2.interval):
        raise EmpathyError("NO_TEMPORAL_OVERLAP",
                           f"{t1.pair} {t1.interval} / {t2.pair} {t2.interval}")


def empathic(t1: Transition, t2: Transition, kind: Tag) -> bool:
    _check_overlap(t1, t2)
    return not t1.tagged(kind).isdisjoint(t2.tagged(kind))


def pre_empathic(t1: Transition, t2: Transition) -> bool:
    return empathic(t1, t2, Tag.PRE)


def post_empathic(t1: Transition, t2: Transition) -> bool:
    return empathic(t1, t2, Tag.POST)


@dataclass(frozen=True)
class EmpathyGraph:
    kind: Tag
    at: float
    vertices: frozenset[SdPair]
    edges: frozenset[tuple[SdPair, SdPair]]  # (u, v) with u < v, no self-loops

    def neighbours(self) -> dict[SdPair, set[SdPair]]:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_edge(self, u: SdPair, v: SdPair) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def is_clique(self, members: Iterable[SdPair]) -> bool:
        members = sorted(members)
        if not set(members) <= self.vertices:
            return False
        return all(self.has_edge(u, v) for u, v in combinations(members, 2))


def active_transitions(transitions: Iterable[Transition], at: float) -> dict[SdPair, Transition]:
    active = {}
    for t in transitions:
        if t.active_at(at):
            if t.pair in active:
                raise EmpathyError("OVERLAPPING_TRANSITIONS", str(t.pair))
            active[t.pair] = t
    return active


def build_empathy_graph(transitions: Iterable[Transition], at: float,
                        kind: Tag) -> EmpathyGraph:
    active = active_transitions(transitions, at)
    by_address: dict[Address, list[SdPair]] = defaultdict(list)
    vertices = set()
    for pair, t in active.items():
        addrs = t.tagged(kind)
        if addrs:
            vertices.add(pair)
        for a in addrs:
            by_address[a].append(pair)
    edges = set()
    for pairs in by_address.values():
        pairs.sort()
        for u, v in combinations(pairs, 2):
            edges.add((u, v))
    return EmpathyGraph(kind, at, frozenset(vertices), frozenset(edges))


@dataclass(frozen=True)
class PivotSet:
    members: frozenset[Address]
    kind: Tag


def pivot_set(transitions: Iterable[Transition], kind: Tag) -> PivotSet:
    sets = [t.tagged(kind) for t in transitions]
    if not sets:
        return PivotSet(frozenset(), kind)
    return PivotSet(frozenset.intersection(*sets), kind)


def connected_components(g: EmpathyGraph) -> list[frozenset[SdPair]]:
    adj = g.neighbours()
    seen: set[SdPair] = set()
    comps = []
    for root in sorted(g.vertices):
        if root in seen:
            continue
        comp = {root}
        stack = [root]
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps  # roots visited in order, so already sorted by smallest member


class Evidence(str, enum.Enum):
    DOWN = "down"
    UP = "up"
    UNKNOWN = "unknown"
    NOT_A_CLIQUE = "not_a_clique"


@dataclass(frozen=True)
class ComponentEvidence:
    evidence: Evidence
    hubs: frozenset[Address]
    pivot_pre: frozenset[Address]
    pivot_post: frozenset[Address]


def classify_component(members: Iterable[SdPair],
                       transitions: Iterable[Transition] | Mapping[SdPair, Transition]
                       ) -> ComponentEvidence:
    """What kind of event a group of sd-pairs points to.

    ``transitions`` must hold exactly one transition per member (extra
    transitions of other pairs are ignored).  A non-empty pivot implies the
    group is a clique in that graph, so pivots alone decide the outcome.
    """
    members = set(members)
    if len(members) < 2:
        raise EmpathyError("SET_TOO_SMALL", f"{len(members)} sd-pair(s)")
    if isinstance(transitions, Mapping):
        chosen = [transitions[m] for m in members]
    else:
        chosen = [t for t in transitions if t.pair in members]
    if sorted(t.pair for t in chosen) != sorted(members):
        raise EmpathyError("MISSING_TRANSITION", "need one transition per member")
    pre = pivot_set(chosen, Tag.PRE).members
    post = pivot_set(chosen, Tag.POST).members
    if pre and post:
        ev, hubs = Evidence.UNKNOWN, pre | post
    elif pre:
        ev, hubs = Evidence.DOWN, pre
    elif post:
        ev, hubs = Evidence.UP, post
    else:
        ev, hubs = Evidence.NOT_A_CLIQUE, frozenset()
    return ComponentEvidence(ev, hubs, pre, post)


def to_dot(g: EmpathyGraph) -> str:
    name = f"{g.kind.value}_empathy"
    lines = [f"graph {name} {{", f"  // at={g.at!r}"]
    for v in sorted(g.vertices):
        lines.append(f'  "{v.ident}";')
    for u, v in sorted(g.edges):
        lines.append(f'  "{u.ident}" -- "{v.ident}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- property checks ------------------------------------------------------


@dataclass(frozen=True)
class KnownEvent:
    """What the checks need to know about a physical event."""

    direction: Tag  # PRE for a down event, POST for an up event
    scope: frozenset[SdPair]


def check_event_instant(transitions: Sequence[Transition], at: float,
                        events: Sequence[KnownEvent]) -> list[str]:
    """Check the empathy-graph properties for all visible events at ``at``.

    Returns human-readable violations; an empty list means every check
    passed.  ``events`` must list every visible event occurring at ``at``.
    """
    violations = []
    active = active_transitions(transitions, at)
    graphs = {k: build_empathy_graph(active.values(), at, k) for k in Tag}
    comps = {k: connected_components(graphs[k]) for k in Tag}
    events = [e for e in events if e.scope]
    all_scope = frozenset().union(*(e.scope for e in events)) if events else frozenset()
    other = {Tag.PRE: Tag.POST, Tag.POST: Tag.PRE}

    for k in Tag:
        stray = graphs[k].vertices - all_scope
        if stray:
            violations.append(f"{k.value} graph vertex outside every scope: "
                              f"{sorted(map(str, stray))}")

    for e in events:
        g = graphs[e.direction]
        label = f"{e.direction.value}-event scope {sorted(map(str, e.scope))}"
        missing = [p for p in e.scope if p not in active]
        if missing:
            violations.append(f"{label}: no active transition for {sorted(map(str, missing))}")
            continue
        if not g.is_clique(e.scope):
            violations.append(f"{label}: not a clique")
        if not pivot_set([active[p] for p in e.scope], e.direction).members:
            violations.append(f"{label}: empty pivot")
        comp = next((c for c in comps[e.direction] if c & e.scope), frozenset())
        if comp != e.scope:
            violations.append(f"{label}: component {sorted(map(str, comp))} is not the scope")
        for c in comps[other[e.direction]]:
            if c & e.scope and not c <= e.scope:
                violations.append(f"{label}: {other[e.direction].value} component "
                                  f"{sorted(map(str, c))} leaves the scope")

    observed = [e for e in events if e.scope <= active.keys()]
    for e1, e2 in combinations(observed, 2):
        for k in Tag:
            crossing = [(u, v) for u in e1.scope for v in e2.scope
                        if graphs[k].has_edge(u, v)]
            if crossing:
                violations.append(f"{k.value} edge between scopes of distinct events: "
                                  f"{str(crossing[0][0])} -- {str(crossing[0][1])}")
            shared = (pivot_set([active[p] for p in e1.scope], k).members
                      & pivot_set([active[p] for p in e2.scope], k).members)
            if shared:
                violations.append(f"{k.value} pivots of distinct events intersect: "
                                  f"{sorted(shared)}")
    return violations
