"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import io
import json
import random
import subprocess
import sys
import time

import pytest

from routevents.balancers import build_nexthop_stats, clean, identify_balancers, rewrite_hops
from routevents.detector import (
    detect_events,
    extract_transitions,
    group_paths,
    infer_from_transitions,
    sweep_candidates,
)
from routevents.empathy import (
    KnownEvent,
    check_event_instant,
    pivot_set,
    post_empathic,
    pre_empathic,
)
from routevents.ingest import parse_internal, read_events, write_events, write_traces
from routevents.model import EventType, ExtendedAddress, Interval, Tag
from routevents.pathdiff import diff_paths
from routevents.scenarios import (
    ALGO_PAIRS,
    ALGO_TIMES,
    PATH_AFTER,
    PATH_BEFORE,
    algorithm_transitions,
    balancer_topology,
    comb_topology,
    empathy_transitions,
    random_scenario,
    uniform_schedule,
)
from routevents.simulator import PhysicalEvent, SampleSpec, Schedule, generate, validate_inference

SEEDS = range(100)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def runs():
    """Every scenario simulated and detected once (threshold 0), with timing."""
    t0 = time.perf_counter()
    out = []
    for seed in SEEDS:
        sc = random_scenario(seed)
        paths, truths = sc.run()
        events, _ = detect_events(paths, threshold=0)
        out.append((sc, paths, truths, events))
    return out, time.perf_counter() - t0


def test_worked_examples(report):
    t0 = time.perf_counter()
    d = diff_paths(PATH_BEFORE, PATH_AFTER)
    ok = d.delta_pre == ("2", "3", "4", "5", "8") and d.delta_post == ("2", "6", "7", "8")

    t1, t2 = empathy_transitions()
    ok &= pre_empathic(t1, t2) and not post_empathic(t1, t2)
    ok &= pivot_set([t1, t2], Tag.PRE).members == {"5", "6"}
    ok &= pivot_set([t1, t2], Tag.POST).members == frozenset()

    T, P = ALGO_TIMES, ALGO_PAIRS
    a, b, c = P["a"], P["b"], P["c"]
    expected = {
        (T["t3"], T["t4"], frozenset({a, b, c}), ExtendedAddress("1", Tag.PRE)),
        (T["t3"], T["t5"], frozenset({a, b}), ExtendedAddress("2", Tag.POST)),
        (T["t2"], T["t4"], frozenset({b, c}), ExtendedAddress("3", Tag.POST)),
    }
    cands = sweep_candidates(algorithm_transitions())
    got = [(x.interval.start, x.interval.end, x.pairs, x.address) for x in cands]
    ok &= len(got) == 3 and set(got) == expected
    events = infer_from_transitions(algorithm_transitions(), 0)
    ok &= len(events) == 1 and (events[0].interval, events[0].scope, events[0].addresses,
                                events[0].type) == (Interval(T["t3"], T["t4"]),
                                                    frozenset({a, b, c}), {"1"}, EventType.DOWN)
    elapsed = time.perf_counter() - t0
    report(1, ok and elapsed < 1.0, f"worked examples reproduced exactly in {elapsed:.3f}s")


def test_completeness(runs, report):
    out, elapsed = runs
    visible = matched = exact = 0
    for _, _, truths, events in out:
        rep = validate_inference(events, truths)
        visible += rep.visible
        matched += rep.matched_truth
        exact += rep.scope_exact
    ok = visible > 0 and matched == visible and exact == visible and elapsed < 30
    report(2, ok, f"{matched}/{visible} visible events matched, {exact}/{visible} scope-exact, "
                  f"{len(out)} scenarios in {elapsed:.1f}s")


def test_correctness(runs, report):
    out, _ = runs
    inferred = unmatched = 0
    for _, _, truths, events in out:
        rep = validate_inference(events, truths)
        inferred += rep.inferred
        unmatched += len(rep.unmatched_inferred)
    report(3, inferred > 0 and unmatched == 0,
           f"{unmatched} of {inferred} inferred events unmatched")


def test_empathy_graph_properties(runs, report):
    out, _ = runs
    violations, instants = [], 0
    for sc, paths, truths, _ in out:
        transitions = extract_transitions(group_paths(paths))
        for at in sc.instants:
            known = [KnownEvent(Tag.PRE if t.direction is EventType.DOWN else Tag.POST, t.scope)
                     for t in truths if t.at == at and t.visible]
            instants += 1
            violations += [f"seed {sc.seed} t={at}: {v}"
                           for v in check_event_instant(transitions, at, known)]
    report(4, not violations,
           f"{len(violations)} violations over {instants} event instants"
           + (f"; first: {violations[0]}" if violations else ""))


def test_scaling(report):
    proc = subprocess.run([sys.executable, "-m", "routevents.benchmark"],
                          capture_output=True, text=True, check=True)
    r = json.loads(proc.stdout)
    ok = (r["transitions"] == r["sizes"] and r["fitted_ratio"] <= 2.5
          and r["full_run_seconds"] < 60)
    report(5, ok, "phase 1+2 " + ", ".join(f"{n}: {t:.2f}s" for n, t in
                                           zip(r["sizes"], r["phase12_seconds"]))
           + f"; {r['fitted_ratio']:.2f}x per doubling (fitted; pairwise "
             f"{', '.join(f'{x:.2f}' for x in r['ratios'])}); full run on "
             f"{r['sizes'][-1]} {r['full_run_seconds']:.1f}s with "
             f"{r['full_run_candidates']} candidates")


def test_load_balancer(report):
    topo = balancer_topology()
    # ten samples per probe
    sched = Schedule({p.probe_id: SampleSpec(3.0 * i, 60.0) for i, p in enumerate(topo.probes)},
                     horizon=549.0)
    ev = PhysicalEvent.make(300.0, EventType.DOWN, [("e1", "f")])
    paths, truths = generate(topo, sched, [ev], seed=0)
    stats = build_nexthop_stats(paths)
    lb, stable = stats[("dst", "n")], stats[("dst2", "k")]
    bmap = identify_balancers(stats)
    cleaned, _, _, _ = clean(paths)
    events, _ = detect_events(cleaned, threshold=0)
    touching = [e for e in events if e.addresses & {"n", "a", "b"}]
    found = [e for e in events if e.interval.contains(300.0) and "f" in e.addresses]

    rng = random.Random(0)
    nodes = [f"10.1.0.{i}" for i in range(40)]
    rmap = {("d", v): rng.choice(nodes) for v in rng.sample(nodes, 10)}
    idem = all(rewrite_hops(once, "d", rmap) == once
               for once in (rewrite_hops(tuple(rng.sample(nodes, rng.randint(1, 15))), "d", rmap)
                            for _ in range(1000)))
    ratios = lb.changes * 10 == lb.samples * 9 and stable.changes * 10 == stable.samples
    ok = (ratios and ("dst", "n") in bmap and ("dst2", "k") not in bmap and not touching
          and len(found) == 1 and idem)
    report(6, ok, f"balancer ratio {lb.changes}/{lb.samples} flagged={('dst', 'n') in bmap}; "
                  f"stable ratio {stable.changes}/{stable.samples} "
                  f"flagged={('dst2', 'k') in bmap}; {len(touching)} events on the balancer "
                  f"after cleanup; idempotent on 1000 paths: {idem}")


def _comb_event_type(direction, **kw):
    topo = comb_topology(6, with_link=direction is EventType.DOWN, **kw)
    ev = PhysicalEvent.make(300.0, direction, [("h", "x")])
    paths, truths = generate(topo, uniform_schedule(topo), [ev], seed=2)
    events, _ = detect_events(paths, threshold=0)
    return [e.type for e in events], truths[0].scope == (events[0].scope if events else None)


def test_type_inference(report):
    down, s1 = _comb_event_type(EventType.DOWN)
    up, s2 = _comb_event_type(EventType.UP)
    unknown, s3 = _comb_event_type(EventType.DOWN, shared_ends=True)
    ok = (down == [EventType.DOWN] and up == [EventType.UP] and unknown == [EventType.UNKNOWN]
          and s1 and s2 and s3)
    report(7, ok, f"down -> {[t.value for t in down]}, up -> {[t.value for t in up]}, "
                  f"shared pre/post addresses -> {[t.value for t in unknown]}")


def _events_text(events):
    buf = io.StringIO()
    write_events(events, buf)
    return buf.getvalue()


def test_determinism_and_roundtrips(runs, report):
    out, _ = runs
    differ, trace_bad, event_bad = [], 0, 0
    for sc, paths, _, events in out:
        single = _events_text(events)
        multi = _events_text(detect_events(paths, threshold=0, threads=8)[0])
        if single != multi:
            differ.append(sc.seed)
        buf = io.StringIO()
        write_traces(paths, buf)
        back, _ = parse_internal(io.StringIO(buf.getvalue()))
        again = io.StringIO()
        write_traces(back, again)
        trace_bad += again.getvalue() != buf.getvalue() or [p.hops for p in back] != \
            [p.hops for p in sorted(paths, key=lambda p: (p.pair, p.timestamp))]
        event_bad += _events_text(read_events(io.StringIO(single))) != single
    ok = not differ and not trace_bad and not event_bad
    report(8, ok, f"1 vs 8 threads differ on {len(differ)} scenarios; "
                  f"{trace_bad} trace and {event_bad} event round-trip failures")
