from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from routevents.empathy import (
    EmpathyError,
    EmpathyGraph,
    Evidence,
    KnownEvent,
    build_empathy_graph,
    check_event_instant,
    classify_component,
    connected_components,
    empathic,
    pivot_set,
    post_empathic,
    pre_empathic,
    to_dot,
)
from routevents.model import SdPair, Tag
from routevents.pathdiff import synthetic_transition
from routevents.scenarios import PAIR1, PAIR2, empathy_transitions


def P(name):
    return SdPair(name, "d")


def test_empathy_example_relations():
    t1, t2 = empathy_transitions()
    assert pre_empathic(t1, t2)
    assert not post_empathic(t1, t2)
    assert pre_empathic(t1, t1) and post_empathic(t2, t2)


def test_empathy_example_pivots_and_evidence():
    ts = empathy_transitions()
    assert pivot_set(ts, Tag.PRE).members == {"5", "6"}
    assert pivot_set(ts, Tag.POST).members == set()
    ev = classify_component({PAIR1, PAIR2}, ts)
    assert ev.evidence is Evidence.DOWN and ev.hubs == {"5", "6"}


def test_empathy_example_graph():
    ts = empathy_transitions(100, 200)
    g = build_empathy_graph(ts, 150, Tag.PRE)
    assert g.vertices == {PAIR1, PAIR2} and g.edges == {(PAIR1, PAIR2)}
    g = build_empathy_graph(ts, 150, Tag.POST)
    assert g.vertices == {PAIR1, PAIR2} and not g.edges
    assert not build_empathy_graph(ts, 250, Tag.PRE).vertices
    assert not build_empathy_graph([], 0, Tag.PRE).vertices


def test_small_relations():
    a = synthetic_transition(P("a"), 0, 10, pre="12")
    b = synthetic_transition(P("b"), 0, 10, pre="34")
    assert not pre_empathic(a, b)
    c = synthetic_transition(P("c"), 0, 10, post="2678")
    d = synthetic_transition(P("d"), 5, 15, post=["7", "11"])
    assert post_empathic(c, d)
    with pytest.raises(EmpathyError) as info:
        pre_empathic(a, synthetic_transition(P("e"), 10, 20, pre="12"))
    assert info.value.code == "NO_TEMPORAL_OVERLAP"


def test_triangle_and_components():
    ts = [synthetic_transition(P(x), 0, 10, pre=["h", x]) for x in "abc"]
    g = build_empathy_graph(ts, 5, Tag.PRE)
    assert len(g.edges) == 3 and g.is_clique(g.vertices)
    assert connected_components(g) == [frozenset(g.vertices)]
    assert pivot_set(ts[:1], Tag.PRE).members == {"h", "a"}


def test_components_small():
    vs = [P(x) for x in "abcd"]
    g = EmpathyGraph(Tag.PRE, 0, frozenset(vs), frozenset())
    assert len(connected_components(g)) == 4
    g = EmpathyGraph(Tag.PRE, 0, frozenset(vs), frozenset({(vs[0], vs[1]), (vs[2], vs[3])}))
    assert sorted(map(len, connected_components(g))) == [2, 2]


def test_classify_unknown_and_not_clique():
    a = synthetic_transition(P("a"), 0, 10, pre=["x", "h"], post=["y", "h"])
    b = synthetic_transition(P("b"), 0, 10, pre=["z", "h"], post=["w", "h"])
    ev = classify_component({P("a"), P("b")}, [a, b])
    assert ev.evidence is Evidence.UNKNOWN and ev.hubs == {"h"}
    c = synthetic_transition(P("c"), 0, 10, pre=["q"], post=["r"])
    assert classify_component({P("a"), P("c")}, [a, c]).evidence is Evidence.NOT_A_CLIQUE
    with pytest.raises(EmpathyError) as info:
        classify_component({P("a")}, [a])
    assert info.value.code == "SET_TOO_SMALL"
    with pytest.raises(EmpathyError) as info:
        classify_component({P("a"), P("z")}, [a])
    assert info.value.code == "MISSING_TRANSITION"


def test_to_dot():
    g = build_empathy_graph(empathy_transitions(), 150, Tag.PRE)
    dot = to_dot(g)
    assert dot.startswith("graph pre_empathy {")
    assert f'"{PAIR1.ident}" -- "{PAIR2.ident}";' in dot


def test_overlapping_transitions_rejected():
    a = synthetic_transition(P("a"), 0, 10, pre="1")
    b = synthetic_transition(P("a"), 5, 15, pre="1")
    with pytest.raises(EmpathyError) as info:
        build_empathy_graph([a, b], 7, Tag.PRE)
    assert info.value.code == "OVERLAPPING_TRANSITIONS"


def test_check_event_instant_flags_stray_vertex():
    ts = empathy_transitions()
    assert check_event_instant(ts, 150, [KnownEvent(Tag.PRE, frozenset({PAIR1, PAIR2}))]) == []
    bad = check_event_instant(ts, 150, [KnownEvent(Tag.PRE, frozenset({PAIR1}))])
    assert bad


# random changed sets over a tiny alphabet
changed = st.tuples(st.sets(st.sampled_from("abcdef"), max_size=3),
                    st.sets(st.sampled_from("abcdef"), max_size=3)).filter(lambda x: x[0] or x[1])


@given(st.lists(changed, min_size=1, max_size=8))
def test_graph_matches_pairwise_oracle(sets):
    ts = [synthetic_transition(P(f"p{i}"), 0, 10, pre=a, post=b) for i, (a, b) in enumerate(sets)]
    for kind in Tag:
        g = build_empathy_graph(ts, 5, kind)
        expected = {(t1.pair, t2.pair) for t1, t2 in combinations(ts, 2)
                    if empathic(t1, t2, kind)}
        assert g.edges == {(min(u, v), max(u, v)) for u, v in expected}
        ref = nx.Graph()
        ref.add_nodes_from(g.vertices)
        ref.add_edges_from(g.edges)
        assert sorted(map(sorted, connected_components(g))) == \
            sorted(map(sorted, nx.connected_components(ref)))
        # a non-empty pivot forces a clique
        for comp in connected_components(g):
            members = [t for t in ts if t.pair in comp]
            if pivot_set(members, kind).members:
                assert g.is_clique(comp)
