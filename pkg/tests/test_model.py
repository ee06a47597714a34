import pytest
from hypothesis import given, strategies as st

from routevents.model import (
    Interval,
    PathError,
    SdPair,
    TraceroutePath,
    canon,
    make_path,
    validate_path,
)

PAIR = SdPair("p", "9", "1")


def test_valid_path_accepted():
    p = TraceroutePath(PAIR, 1.0, ("1", "2", "3"))
    assert validate_path(p) is p


@pytest.mark.parametrize("hops,code", [
    (("1", "2", "1", "3"), "CYCLE"),
    ((), "EMPTY"),
    (("7", "2"), "SOURCE_MISMATCH"),
])
def test_invalid_paths(hops, code):
    with pytest.raises(PathError) as info:
        validate_path(TraceroutePath(PAIR, 1.0, hops))
    assert info.value.code == code


def test_source_check_skipped_without_source():
    validate_path(TraceroutePath(SdPair("p", "9"), 0.0, ("7", "9")))


def test_canon():
    assert canon(" 010.001.000.255 ") == "10.1.0.255"
    assert canon("2001:DB8::1") == "2001:db8::1"
    with pytest.raises(PathError):
        canon("   ")


def test_pair_identity_ignores_source():
    a = SdPair("p1", "d", "10.0.0.1")
    b = SdPair("p1", "d", "10.0.0.2")
    assert a == b and hash(a) == hash(b)
    assert SdPair("p2", "d", "10.0.0.1") != a


@given(st.text(alphabet="abc12.:", min_size=1), st.text(alphabet="abc12.:", min_size=1))
def test_ident_roundtrip(probe, dst):
    p = SdPair(probe, dst)
    assert SdPair.from_ident(p.ident) == p


def test_interval_semantics():
    iv = Interval(10, 20)
    assert iv.active_at(10) and not iv.active_at(20)
    assert iv.contains(20)
    assert not iv.overlaps_open(Interval(20, 30))
    assert iv.overlaps_closed(Interval(20, 30))
    assert iv.midpoint == 15
    with pytest.raises(ValueError):
        Interval(2, 1)


def test_make_path_canonicalizes():
    p = make_path("x", "010.0.0.9", 3, ["10.0.0.01", "10.0.0.9"])
    assert p.hops == ("10.0.0.1", "10.0.0.9")
    assert p.pair.source == "10.0.0.1" and p.pair.destination == "10.0.0.9"
