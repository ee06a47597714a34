"""Load-balancer detection from next-hop instability, and path rewriting.

For each destination, every node's next hop is tracked along each
sd-pair's time-ordered series.  A (destination, node) whose next hop
changes in more than a given fraction of its samples is treated as a
balancer and its next hop is pinned to one representative address.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .model import Address, PathError, TraceroutePath, validate_path

DEFAULT_INSTABILITY = 0.20


@dataclass
class NodeStats:
    samples: int = 0
    changes: int = 0
    next_hops: set = field(default_factory=set)

    def merge(self, other: "NodeStats"):
        self.samples += other.samples
        self.changes += other.changes
        self.next_hops |= other.next_hops


NextHopStats = dict  # (destination, node) -> NodeStats
BalancerMap = dict   # (destination, node) -> representative


def build_nexthop_stats(paths: Iterable[TraceroutePath]) -> NextHopStats:
    """Next-hop sample and change counts per (destination, node).

    Counts are taken along each sd-pair's series in timestamp order; a
    change is an observation whose next hop differs from the previous
    observation of the same node in the same series.
    """
    by_pair: dict = {}
    for p in paths:
        by_pair.setdefault(p.pair, []).append(p)
    stats: NextHopStats = {}
    for pair in sorted(by_pair, key=lambda p: p.key):
        last: dict[Address, Address] = {}
        for p in sorted(by_pair[pair], key=lambda p: p.timestamp):
            for node, nxt in zip(p.hops, p.hops[1:]):
                key = (pair.destination, node)
                st = stats.setdefault(key, NodeStats())
                st.samples += 1
                st.next_hops.add(nxt)
                if node in last and last[node] != nxt:
                    st.changes += 1
                last[node] = nxt
    return stats


def identify_balancers(stats: NextHopStats,
                       instability: float = DEFAULT_INSTABILITY) -> BalancerMap:
    if not 0 < instability < 1:
        raise ValueError(f"instability must be in (0, 1), got {instability}")
    return {
        key: min(st.next_hops)
        for key, st in sorted(stats.items())
        if st.samples > 0 and st.changes / st.samples > instability
    }


def rewrite_hops(hops: tuple, destination: Address, bmap: BalancerMap) -> tuple:
    out = [hops[0]]
    for hop in hops[1:]:
        rep = bmap.get((destination, out[-1]))
        nxt = rep if rep is not None else hop
        if nxt != out[-1]:
            out.append(nxt)
    return tuple(out)


def rewrite_paths(paths: Iterable[TraceroutePath], bmap: BalancerMap
                  ) -> tuple[list[TraceroutePath], Counter]:
    """Pin balancer next hops to their representatives.

    Returns the rewritten paths and a counter of dropped ones (paths that
    became cyclic are dropped under ``CYCLE``).
    """
    out, rejected = [], Counter()
    for p in paths:
        if not bmap:
            out.append(p)
            continue
        hops = rewrite_hops(p.hops, p.pair.destination, bmap)
        q = p if hops == p.hops else TraceroutePath(p.pair, p.timestamp, hops)
        try:
            out.append(validate_path(q))
        except PathError as exc:
            rejected[exc.code] += 1
    return out, rejected


def clean(paths: Iterable[TraceroutePath], instability: float = DEFAULT_INSTABILITY):
    """Detect balancers and rewrite in one go: ``(paths, map, stats, rejected)``."""
    paths = list(paths)
    stats = build_nexthop_stats(paths)
    bmap = identify_balancers(stats, instability)
    rewritten, rejected = rewrite_paths(paths, bmap)
    return rewritten, bmap, stats, rejected


def write_balancers(bmap: BalancerMap, stats: NextHopStats, out: TextIO):
    for (dst, node), rep in sorted(bmap.items()):
        st = stats[(dst, node)]
        out.write(f"balancer\t{dst}\t{node}\t{rep}\t{st.samples}\t{st.changes}\n")
