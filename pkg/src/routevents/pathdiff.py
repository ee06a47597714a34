"""Changed portions of consecutive traceroute paths and per-pair transitions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .model import (
    Address,
    ExtendedAddress,
    Interval,
    PathError,
    SdPair,
    Tag,
    TraceroutePath,
)


@dataclass(frozen=True)
class PathDiff:
    common_head: tuple[Address, ...]
    common_tail: tuple[Address, ...]
    delta_pre: tuple[Address, ...]
    delta_post: tuple[Address, ...]

    def interior_overlap(self) -> frozenset[Address]:
        """Vertices shared by both deltas other than their delimiters.

        Non-empty means the change is not one continuous subpath.
        """
        delimiters = {self.delta_pre[0], self.delta_pre[-1],
                      self.delta_post[0], self.delta_post[-1]}
        return frozenset(set(self.delta_pre) & set(self.delta_post) - delimiters)


def common_prefix(p: Sequence[Address], q: Sequence[Address]) -> tuple[Address, ...]:
    if not p or not q or p[0] != q[0]:
        raise PathError("FIRST_HOP_MISMATCH",
                        f"{p[0] if p else None} != {q[0] if q else None}")
    j = 0
    for a, b in zip(p, q):
        if a != b:
            break
        j += 1
    return tuple(p[:j])


def common_suffix(p: Sequence[Address], q: Sequence[Address]) -> tuple[Address, ...]:
    if tuple(p) == tuple(q):
        raise PathError("IDENTICAL_PATHS")
    n = 0
    for a, b in zip(reversed(p), reversed(q)):
        if a != b:
            break
        n += 1
    return tuple(p[len(p) - n:]) if n else ()


def diff_paths(p: Sequence[Address], q: Sequence[Address]) -> PathDiff:
    """Split two differing paths of one pair into head, tail and deltas.

    Both deltas keep their delimiting vertices: they start at the last
    vertex of the common head and, when the tail is non-empty, end at its
    first vertex.  With an empty tail a delta runs to the end of its path.
    """
    p, q = tuple(p), tuple(q)
    if p == q:
        raise PathError("IDENTICAL_PATHS")
    head = common_prefix(p, q)
    tail = common_suffix(p, q)
    j = len(head)
    # head and tail never overlap on acyclic inputs; guard anyway
    k = min(len(tail), min(len(p), len(q)) - j)
    tail = tail[len(tail) - k:] if k > 0 else ()
    return PathDiff(head, tail, _delta(p, j, len(tail)), _delta(q, j, len(tail)))


def _delta(path: tuple, head_len: int, tail_len: int) -> tuple:
    stop = len(path) - tail_len + 1 if tail_len else len(path)
    return path[head_len - 1:stop]


@dataclass(frozen=True)
class Transition:
    """Two consecutive differing samples of one sd-pair.

    Active on the half-open ``interval``.  ``diff`` is ``None`` only for
    hand-built transitions that carry just a changed set.
    """

    pair: SdPair
    interval: Interval
    changed_set: frozenset[ExtendedAddress]
    diff: Optional[PathDiff] = None

    def tagged(self, tag: Tag) -> frozenset[Address]:
        return frozenset(ea.address for ea in self.changed_set if ea.tag is tag)

    def active_at(self, t: float) -> bool:
        return self.interval.active_at(t)


def changed_set(diff: PathDiff) -> frozenset[ExtendedAddress]:
    return _changed_set(diff.delta_pre, diff.delta_post)


@lru_cache(maxsize=1 << 16)
def _changed_set(delta_pre: tuple, delta_post: tuple) -> frozenset[ExtendedAddress]:
    # pairs hit by one event share deltas, so their sets are shared too
    return frozenset(
        [ExtendedAddress(a, Tag.PRE) for a in delta_pre]
        + [ExtendedAddress(a, Tag.POST) for a in delta_post]
    )


def make_transition(pair: SdPair, start: float, end: float,
                    p: Sequence[Address], q: Sequence[Address]) -> Transition:
    if not start < end:
        raise PathError("UNSORTED_INPUT", f"{pair}: {start} !< {end}")
    d = diff_paths(p, q)
    return Transition(pair, Interval(start, end), changed_set(d), d)


def synthetic_transition(pair: SdPair, start: float, end: float,
                         pre: Iterable[Address] = (),
                         post: Iterable[Address] = ()) -> Transition:
    """A transition given only by its changed set (no underlying paths)."""
    cs = frozenset([ExtendedAddress(a, Tag.PRE) for a in pre]
                   + [ExtendedAddress(a, Tag.POST) for a in post])
    if not cs:
        raise ValueError("changed set must be non-empty")
    return Transition(pair, Interval(start, end), cs)


def find_transitions(samples: Sequence[TraceroutePath],
                     stats: Optional[Counter] = None) -> list[Transition]:
    """Transitions of a single sd-pair from its time-ordered samples.

    Adjacent samples whose first hops differ are skipped and counted under
    ``first_hop_mismatch`` in ``stats``; transitions whose deltas share
    interior vertices are kept and counted under ``noncontiguous_change``.
    """
    out: list[Transition] = []
    if stats is None:
        stats = Counter()
    for prev, cur in zip(samples, samples[1:]):
        if cur.pair != prev.pair:
            raise PathError("MIXED_PAIRS", f"{prev.pair} vs {cur.pair}")
        if not prev.timestamp < cur.timestamp:
            raise PathError("UNSORTED_INPUT",
                            f"{cur.pair}: {prev.timestamp} then {cur.timestamp}")
        if prev.hops == cur.hops:
            continue
        try:
            t = make_transition(cur.pair, prev.timestamp, cur.timestamp,
                                prev.hops, cur.hops)
        except PathError as exc:
            if exc.code != "FIRST_HOP_MISMATCH":
                raise
            stats["first_hop_mismatch"] += 1
            continue
        if t.diff.interior_overlap():
            stats["noncontiguous_change"] += 1
        out.append(t)
    return out
