"""Ready-made inputs: worked examples, small hand-built topologies, seeded
random scenarios and synthetic inputs for timing runs."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import EventType, SdPair, TraceroutePath
from .pathdiff import Transition, make_transition, synthetic_transition
from .simulator import (
    GroundTruth,
    PhysicalEvent,
    SampleSpec,
    Schedule,
    SimulationError,
    Topology,
    generate,
    group_truth,
    link,
    route,
)

# -- worked examples -------------------------------------------------------

PATH_BEFORE = ("1", "2", "3", "4", "5", "8", "9")
PATH_AFTER = ("1", "2", "6", "7", "8", "9")

PAIR1 = SdPair("pr1", "d1", "s1")
PAIR2 = SdPair("pr2", "d2", "s2")
EMPATHY_PATHS = {
    PAIR1: (("s1", "5", "6", "d1"), ("s1", "5", "9", "6", "d1")),
    PAIR2: (("s2", "4", "5", "6", "8", "d2"), ("s2", "4", "10", "8", "d2")),
}


def empathy_transitions(t: float = 100.0, t_next: float = 200.0) -> list[Transition]:
    """Link (5, 6) fails between ``t`` and ``t_next`` for both pairs."""
    return [make_transition(pair, t, t_next, before, after)
            for pair, (before, after) in EMPATHY_PATHS.items()]


def empathy_traces(samples_each_side: int = 3) -> list[TraceroutePath]:
    """Both pairs sampled every 50 s; the change falls between 100 and 150.

    Three samples per side keep every next-hop change ratio at or below
    20%, so load-balancer cleanup leaves the traces alone.
    """
    out = []
    for pair, (before, after) in EMPATHY_PATHS.items():
        offset = 0.0 if pair is PAIR1 else 5.0
        for k in range(2 * samples_each_side):
            hops = before if k < samples_each_side else after
            out.append(TraceroutePath(pair, 50.0 * k + offset, hops))
    return out


ALGO_PAIRS = {name: SdPair(name, "dst", f"src-{name}") for name in "abc"}
ALGO_TIMES = {f"t{k}": float(10 * k) for k in range(1, 7)}


def algorithm_transitions() -> list[Transition]:
    """Three overlapping transitions that sweep into three candidates and
    prune down to one down event with hub 1 seen by a, b and c."""
    t = ALGO_TIMES
    a, b, c = ALGO_PAIRS["a"], ALGO_PAIRS["b"], ALGO_PAIRS["c"]
    return [
        synthetic_transition(a, t["t3"], t["t6"], pre=["1"], post=["2"]),
        synthetic_transition(b, t["t1"], t["t5"], pre=["1"], post=["2", "3"]),
        synthetic_transition(c, t["t2"], t["t4"], pre=["1"], post=["3"]),
    ]


# -- hand-built topologies -------------------------------------------------


def comb_topology(n: int, with_link: bool = True, shared_ends: bool = False) -> Topology:
    """``n`` probes whose routes all cross link (h, x).

    Probe i runs ``s_i u_i h x w_i d_i``; a private 4-hop detour
    ``u_i r_i1 r_i2 r_i3 w_i`` takes over when (h, x) is missing.  With
    ``shared_ends`` all probes share one ``u`` and one ``w`` (and one detour),
    so the changed portions overlap both before and after.
    """
    edges = []
    probes = []
    for i in range(n):
        u = "u" if shared_ends else f"u{i}"
        w = "w" if shared_ends else f"w{i}"
        r = "r" if shared_ends else f"r{i}"
        s, d = f"s{i}", f"d{i}"
        edges += [(s, u), (u, "h"), ("x", w), (w, d),
                  (u, f"{r}a"), (f"{r}a", f"{r}b"), (f"{r}b", f"{r}c"), (f"{r}c", w)]
        probes.append(SdPair(f"p{i}", d, s))
    if with_link:
        edges.append(("h", "x"))
    return Topology.build(edges, probes)


def uniform_schedule(topology: Topology, period: float = 60.0, horizon: float = 600.0,
                     jitter: float = 0.0, stagger: float = 7.0) -> Schedule:
    return Schedule({p.probe_id: SampleSpec(round((i * stagger) % period, 3), period, jitter)
                     for i, p in enumerate(topology.probes)}, horizon)


def balancer_topology() -> Topology:
    """Three probes cross an equal-cost balancer ``n`` (via ``a`` or ``b``);
    a fourth probe crosses link (k, e1), with a longer backup via e2, e3."""
    edges = [("n", "a"), ("n", "b"), ("a", "m"), ("b", "m"), ("m", "dst")]
    probes = []
    for i in range(3):
        edges.append((f"src{i}", "n"))
        probes.append(SdPair(f"lb{i}", "dst", f"src{i}"))
    edges += [("q", "k"), ("k", "e1"), ("e1", "f"), ("f", "dst2"),
              ("k", "e2"), ("e2", "e3"), ("e3", "f")]
    probes.append(SdPair("st0", "dst2", "q"))
    return Topology.build(edges, probes, balancers=["n"])


# -- random scenarios ------------------------------------------------------


@dataclass
class Scenario:
    seed: int
    topology: Topology
    schedule: Schedule
    events: list[PhysicalEvent]

    def run(self) -> tuple[list[TraceroutePath], list[GroundTruth]]:
        return generate(self.topology, self.schedule, self.events, self.seed)

    @property
    def instants(self) -> list[float]:
        return sorted({e.at for e in self.events})


def _random_graph(rng: random.Random, n: int, degree: float) -> list[tuple[str, str]]:
    labels = [f"10.0.{i // 256}.{i % 256}" for i in range(n)]
    order = labels[:]
    rng.shuffle(order)
    edges = {link(order[k], order[rng.randrange(k)]) for k in range(1, n)}
    target = min(round(n * degree / 2), n * (n - 1) // 2)
    while len(edges) < target:
        u, v = rng.sample(labels, 2)
        edges.add(link(u, v))
    return sorted(edges)


def _candidate_event(rng: random.Random, state: Topology, at: float) -> PhysicalEvent:
    probe = rng.choice(state.probes)
    path = route(state, probe.source, probe.destination)
    adj = state.adjacency
    if rng.random() < 0.5 and len(path) > 1:
        i = rng.randrange(len(path) - 1)
        hub = rng.choice(path[i:i + 2])
        first = link(path[i], path[i + 1])
        others = [link(hub, w) for w in adj[hub] if link(hub, w) != first]
        extra = rng.sample(others, rng.randint(0, min(2, len(others))))
        return PhysicalEvent.make(at, EventType.DOWN, [first] + extra)
    hub = rng.choice(path)
    strangers = sorted(v for v in state.vertices if v != hub and v not in adj[hub])
    if not strangers:
        raise SimulationError("NO_CANDIDATE")
    ends = rng.sample(strangers, min(len(strangers), rng.randint(1, 2)))
    return PhysicalEvent.make(at, EventType.UP, [(hub, v) for v in ends])


def random_scenario(seed: int, vertices=(30, 80), degree=(3.0, 4.0), pairs=(10, 30),
                    events=(3, 8), gap: float = 600.0, period=(60.0, 120.0),
                    max_jitter: float = 10.0, simultaneous: float = 0.3,
                    attempts: int = 500) -> Scenario:
    """A seeded scenario whose events satisfy the inference assumptions.

    Event groups are ``gap`` seconds apart, more than two sampling periods,
    so transitions caused by different groups never overlap.  A group holds
    one event or, with probability ``simultaneous``, two non-interfering
    ones.  Every event keeps all probes connected.
    """
    rng = random.Random(seed)
    n = rng.randint(*vertices)
    labels_edges = _random_graph(rng, n, rng.uniform(*degree))
    labels = sorted({x for e in labels_edges for x in e})
    probes = []
    for j in range(rng.randint(*pairs)):
        src, dst = rng.sample(labels, 2)
        probes.append(SdPair(f"p{j:02d}", dst, src))
    state = Topology.build(labels_edges, probes)
    start = Topology.build(labels_edges, probes)

    wanted = rng.randint(*events)
    chosen: list[PhysicalEvent] = []
    at = 2 * period[1] + 2 * max_jitter + 100.0
    while len(chosen) < wanted:
        size = 2 if wanted - len(chosen) >= 2 and rng.random() < simultaneous else 1
        group: list[PhysicalEvent] = []
        for _ in range(attempts):
            try:
                e = _candidate_event(rng, state, at)
                after, truths = group_truth(state, group + [e])
            except SimulationError:
                continue
            if not all(after.connected(p.source, p.destination) for p in probes):
                continue
            if not truths[-1].visible:
                continue
            group.append(e)
            if len(group) == size:
                break
        if not group:
            raise SimulationError("NO_CANDIDATE", f"seed {seed}: no admissible event")
        state, _ = group_truth(state, group)
        chosen.extend(group)
        at += gap

    samples = {}
    for p in probes:
        per = round(rng.uniform(*period), 3)
        samples[p.probe_id] = SampleSpec(round(rng.uniform(0, per), 3), per,
                                         round(rng.uniform(0, max_jitter), 3))
    return Scenario(seed, start, Schedule(samples, at), chosen)


# -- timing input ----------------------------------------------------------


def flapping_paths(n_transitions: int, episodes: int = 5) -> list[TraceroutePath]:
    """Paths producing exactly ``n_transitions`` transitions.

    ``n_transitions // episodes`` probes flip between two routes in lockstep
    (with small offsets), so the number of candidate events stays fixed
    while the number of transitions grows.
    """
    route_a = ("u", "h", "x", "w", "d")
    route_b = ("u", "y", "w", "d")
    probes = n_transitions // episodes
    out = []
    for i in range(probes):
        src = f"s{i}"
        pair = SdPair(f"f{i}", "d", src)
        off = (i % 97) * 0.01
        for k in range(episodes + 1):
            hops = (src,) + (route_a if k % 2 == 0 else route_b)
            out.append(TraceroutePath(pair, round(100.0 * k + off, 3), hops))
    return out
