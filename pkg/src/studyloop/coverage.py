"""Per-second watch coverage for one user on one video.

Coverage is the set of seconds the user has ever seen, kept as a sorted
tuple of disjoint maximal half-open intervals. Values are immutable;
marking returns a new value, so snapshots can be handed between contexts
freely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Literal

from .course import Segment

RegionTag = Literal["seen_prior_parts", "seen_current_part", "unseen", "relevant"]


@dataclass(frozen=True)
class Region:
    start_s: int
    end_s: int
    tag: RegionTag


@dataclass(frozen=True)
class WatchCoverage:
    user_id: str
    video_id: str
    duration_s: int
    intervals: tuple[tuple[int, int], ...] = ()
    last_position_s: int = 0

    def seen_count(self) -> int:
        return sum(b - a for a, b in self.intervals)

    def seen_between(self, from_s: int, to_s: int) -> int:
        """Number of seen seconds inside [from_s, to_s)."""
        total = 0
        for a, b in self.intervals:
            if b <= from_s:
                continue
            if a >= to_s:
                break
            total += min(b, to_s) - max(a, from_s)
        return total

    def contains(self, second: int) -> bool:
        return self.seen_between(second, second + 1) == 1

    def seen_seconds(self) -> set[int]:
        return {s for a, b in self.intervals for s in range(a, b)}

    def iter_intervals(self) -> Iterator[tuple[int, int]]:
        return iter(self.intervals)


def empty_coverage(user_id: str, video_id: str, duration_s: int) -> WatchCoverage:
    if duration_s <= 0:
        raise ValueError(f"video {video_id}: duration_s must be positive")
    return WatchCoverage(user_id=user_id, video_id=video_id, duration_s=duration_s)


def _merge_in(intervals: tuple[tuple[int, int], ...], from_s: int, to_s: int) -> tuple[tuple[int, int], ...]:
    merged: list[tuple[int, int]] = []
    lo, hi = from_s, to_s
    placed = False
    for a, b in intervals:
        if b < lo:
            merged.append((a, b))
        elif a > hi:
            if not placed:
                merged.append((lo, hi))
                placed = True
            merged.append((a, b))
        else:
            # adjacent or overlapping: absorb into the new interval
            lo, hi = min(lo, a), max(hi, b)
    if not placed:
        merged.append((lo, hi))
    return tuple(merged)


def mark_watched(cov: WatchCoverage, from_s: int, to_s: int) -> WatchCoverage:
    """Record that [from_s, to_s) has been seen and move the resume position.

    Idempotent and commutative as a set operation. An empty interval leaves
    the seen set untouched but still updates last_position_s.
    """
    if not (0 <= from_s <= to_s <= cov.duration_s):
        raise ValueError(
            f"interval [{from_s},{to_s}) outside video {cov.video_id} "
            f"bounds [0,{cov.duration_s}]"
        )
    if from_s == to_s:
        return replace(cov, last_position_s=min(to_s, cov.duration_s))
    return replace(
        cov,
        intervals=_merge_in(cov.intervals, from_s, to_s),
        last_position_s=min(to_s, cov.duration_s),
    )


def watched_fraction(cov: WatchCoverage, seg: Segment) -> float:
    """Fraction of the segment's seconds that have ever been seen."""
    if seg.video_id != cov.video_id:
        raise ValueError(
            f"segment {seg.segment_id} belongs to video {seg.video_id}, "
            f"not {cov.video_id}"
        )
    return cov.seen_between(seg.start_s, seg.end_s) / seg.length_s


def next_unseen(cov: WatchCoverage, from_s: int) -> int | None:
    """Smallest unseen second at or after from_s, or None if none remain."""
    if not (0 <= from_s <= cov.duration_s):
        raise ValueError(f"from_s {from_s} outside [0,{cov.duration_s}]")
    pos = from_s
    for a, b in cov.intervals:
        if b <= pos:
            continue
        if a > pos:
            break
        pos = b
    return pos if pos < cov.duration_s else None


def coverage_regions(cov: WatchCoverage, current_part: Segment | None) -> list[Region]:
    """Maximal intervals for rendering the progress bar.

    Seen seconds inside the current part are tagged seen_current_part, seen
    seconds elsewhere seen_prior_parts, the rest unseen; these regions
    partition [0, duration_s). The current part's full interval is appended
    once as an overlaying "relevant" region.
    """
    if current_part is not None and current_part.video_id != cov.video_id:
        raise ValueError(
            f"segment {current_part.segment_id} belongs to video "
            f"{current_part.video_id}, not {cov.video_id}"
        )

    cuts = {0, cov.duration_s}
    for a, b in cov.intervals:
        cuts.add(a)
        cuts.add(b)
    if current_part is not None:
        cuts.add(current_part.start_s)
        cuts.add(current_part.end_s)
    edges = sorted(cuts)

    def tag_of(start: int) -> RegionTag:
        seen = cov.contains(start)
        if not seen:
            return "unseen"
        if current_part is not None and current_part.start_s <= start < current_part.end_s:
            return "seen_current_part"
        return "seen_prior_parts"

    regions: list[Region] = []
    for a, b in zip(edges, edges[1:]):
        tag = tag_of(a)
        if regions and regions[-1].tag == tag and regions[-1].end_s == a:
            regions[-1] = Region(regions[-1].start_s, b, tag)
        else:
            regions.append(Region(a, b, tag))
    if current_part is not None:
        regions.append(Region(current_part.start_s, current_part.end_s, "relevant"))
    return regions
