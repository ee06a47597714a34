"""Routing event inference from traceroute path changes."""

from .detector import CandidateEvent, InferredEvent, RunStats, detect_events
from .model import EventType, ExtendedAddress, Interval, SdPair, Tag, TraceroutePath
from .pathdiff import PathDiff, Transition, diff_paths, find_transitions

__all__ = [
    "CandidateEvent", "EventType", "ExtendedAddress", "InferredEvent", "Interval",
    "PathDiff", "RunStats", "SdPair", "Tag", "TraceroutePath", "Transition",
    "detect_events", "diff_paths", "find_transitions",
]
