"""Shared domain types for traceroute change analysis.

Addresses are plain strings in canonical form (see :func:`canon`).  Every
other type is an immutable dataclass or enum so values can be shared
freely between threads.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

Address = str

_IPV4 = re.compile(r"^\d{1,3}(\.\d{1,3}){3}$")


class AnalysisError(ValueError):
    """Base error carrying a machine-readable reason code."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class PathError(AnalysisError):
    pass


def canon(addr: str) -> Address:
    """Canonical textual form of an address.

    Lowercases and strips whitespace; dotted-quad IPv4 octets lose their
    leading zeros.  IPv6 is handled textually only (zone ids are kept).
    """
    a = addr.strip().lower()
    if not a:
        raise PathError("EMPTY", "empty address")
    if _IPV4.match(a):
        a = ".".join(str(int(octet)) for octet in a.split("."))
    return a


@dataclass(frozen=True, order=True)
class SdPair:
    """A measured (probe, destination) pair.

    Identity is ``(probe_id, destination)``: two probes behind the same NAT
    report the same source address but are different pairs.
    """

    probe_id: str
    destination: Address
    source: Address = field(default="", compare=False)

    def __post_init__(self):
        # pairs are hashed constantly during the sweep
        object.__setattr__(self, "_hash", hash((self.probe_id, self.destination)))

    def __hash__(self):
        return self._hash

    @property
    def key(self) -> tuple[str, str]:
        """Sort key with the same order as the dataclass, but compared in C."""
        return (self.probe_id, self.destination)

    @property
    def ident(self) -> str:
        return f"{self.probe_id}→{self.destination}"

    @classmethod
    def from_ident(cls, ident: str, source: Address = "") -> "SdPair":
        probe, sep, dst = ident.partition("→")
        if not sep or not probe or not dst:
            raise AnalysisError("MALFORMED", f"bad sd-pair id {ident!r}")
        return cls(probe, dst, source)

    def __str__(self):
        return self.ident


@dataclass(frozen=True)
class TraceroutePath:
    pair: SdPair
    timestamp: float
    hops: tuple[Address, ...]


def validate_path(path: TraceroutePath) -> TraceroutePath:
    """Return ``path`` unchanged, or raise :class:`PathError`.

    Reason codes: ``EMPTY``, ``SOURCE_MISMATCH``, ``CYCLE``.
    """
    hops = path.hops
    if not hops:
        raise PathError("EMPTY", f"{path.pair} @ {path.timestamp}")
    if path.pair.source and hops[0] != path.pair.source:
        raise PathError(
            "SOURCE_MISMATCH", f"first hop {hops[0]} != source {path.pair.source}"
        )
    if len(set(hops)) != len(hops):
        raise PathError("CYCLE", f"{path.pair} @ {path.timestamp}")
    return path


class Tag(str, enum.Enum):
    PRE = "pre"
    POST = "post"

    __hash__ = str.__hash__  # the Enum default is pure Python and hot in the sweep


class ExtendedAddress(NamedTuple):
    address: Address
    tag: Tag

    def __str__(self):
        return f"{self.address}^{self.tag.value}"


@dataclass(frozen=True, order=True)
class Interval:
    """Time window.

    Transitions are active on ``[start, end)``; event windows are closed.
    """

    start: float
    end: float

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} > end {self.end}")

    def active_at(self, t: float) -> bool:
        return self.start <= t < self.end

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end

    def overlaps_open(self, other: "Interval") -> bool:
        return max(self.start, other.start) < min(self.end, other.end)

    def overlaps_closed(self, other: "Interval") -> bool:
        return max(self.start, other.start) <= min(self.end, other.end)

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2


class EventType(str, enum.Enum):
    DOWN = "down"
    UP = "up"
    UNKNOWN = "unknown"


def make_path(probe_id: str, destination: str, timestamp: float,
              hops: Sequence[str]) -> TraceroutePath:
    """Convenience constructor: canonicalizes and takes hops[0] as source."""
    hops = tuple(canon(h) for h in hops)
    pair = SdPair(probe_id, canon(destination), hops[0] if hops else "")
    return TraceroutePath(pair, float(timestamp), hops)
