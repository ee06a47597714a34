import math
import os
from collections import defaultdict

from hypothesis import HealthCheck, settings

settings.register_profile("dev", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def literal_sweep(transitions):
    """Straight transcription of the candidate-event sweep.

    Every endpoint visits every extended address ever seen and recomputes
    its pair set from the transitions active at that instant; the last
    values of each variable are kept as histories.  The local-maximum test
    runs on every visit, and the output is a set.  Quadratic; oracle only.
    """
    instants = sorted({x for t in transitions for x in (t.interval.start, t.interval.end)})
    addresses = sorted({a for t in transitions for a in t.changed_set})
    S = {a: [frozenset()] for a in addresses}
    T = {a: [-math.inf] for a in addresses}
    out = set()
    for x in instants:
        for a in addresses:
            sdp = frozenset(t.pair for t in transitions
                            if t.interval.start <= x < t.interval.end and a in t.changed_set)
            if S[a][-1] != sdp:
                S[a].append(sdp)
                T[a].append(x)
            hist = [frozenset(), frozenset()] + S[a]
            times = [-math.inf, -math.inf] + T[a]
            if len(hist[-3]) <= len(hist[-2]) and len(hist[-2]) > len(hist[-1]):
                out.add((times[-2], times[-1], hist[-2], a))
    return out


def literal_prune(cands):
    keep = []
    for i, c in enumerate(cands):
        if not any(c.pairs < d.pairs and c.interval.overlaps_closed(d.interval)
                   for j, d in enumerate(cands) if j != i):
            keep.append(c)
    return keep


def group_index(items, key):
    out = defaultdict(list)
    for it in items:
        out[key(it)].append(it)
    return out
