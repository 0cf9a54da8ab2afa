"""Seek-chain construction and quiz-relative seeking statistics.

Users often need several rapid seeks to reach the place they want, so raw
seek events overstate intent. Seeks by one user on one video are merged
into a chain whenever the wall-clock gap to the previous seek is under the
merge threshold (default 5000 ms, strict). A chain keeps the first seek's
origin and the last seek's destination; chains that land where they began
are dropped from direction-based statistics and counted separately.

Quiz-relative statistics compare seeking at quiz positions against a
per-second-of-video baseline, mirroring the figures this kind of log
analysis feeds: where backward chains start, where forward chains land,
and which seconds forward chains skip over.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .events import EventKind, InteractionEvent

MERGE_THRESHOLD_MS = 5000
QUIZ_WINDOW_S = 10


@dataclass(frozen=True)
class SeekChain:
    user_id: str
    video_id: str
    source_s: int
    dest_s: int
    started_at_ms: int
    crossed_quizzes: tuple[int, ...] = ()

    @property
    def direction(self) -> str:
        return "forward" if self.dest_s > self.source_s else "backward"

    @property
    def low_s(self) -> int:
        return min(self.source_s, self.dest_s)

    @property
    def high_s(self) -> int:
        return max(self.source_s, self.dest_s)


@dataclass(frozen=True)
class ChainClassification:
    starts_at_quiz: bool
    ends_in_quiz_window: bool
    crosses_quiz: bool
    crossed_quizzes: tuple[int, ...]

    @property
    def plain(self) -> bool:
        return not (self.starts_at_quiz or self.ends_in_quiz_window or self.crosses_quiz)


@dataclass(frozen=True)
class VideoOpenSummary:
    """How one user engaged a video across sessions: number of sessions in
    which they played it, and whether any single open finished it."""

    opens: int
    finished: bool


@dataclass(frozen=True)
class SeekStats:
    """Fractions are None when their denominator is empty (undefined)."""

    total_chains: int
    backward_from_quiz_fraction: float | None
    forward_to_quiz_window_fraction: float | None
    chains_not_crossing_quiz_fraction: float | None
    per_quiz_backward_rate_ratio: float | None
    forward_cross_rate_ratio: float | None
    rewatch_fraction: float | None


@dataclass(frozen=True)
class SeekTally:
    """Mergeable counts behind SeekStats; merging sums every field, so
    per-video tallies pool into course-wide statistics."""

    total_chains: int = 0
    zero_displacement_dropped: int = 0
    backward_chains: int = 0
    forward_chains: int = 0
    backward_from_quiz: int = 0
    forward_to_quiz_window: int = 0
    chains_not_crossing: int = 0
    forward_quiz_crossings: int = 0
    forward_skip_seconds: int = 0
    quiz_count: int = 0
    duration_s: int = 0

    def merge(self, other: "SeekTally") -> "SeekTally":
        return SeekTally(
            total_chains=self.total_chains + other.total_chains,
            zero_displacement_dropped=self.zero_displacement_dropped + other.zero_displacement_dropped,
            backward_chains=self.backward_chains + other.backward_chains,
            forward_chains=self.forward_chains + other.forward_chains,
            backward_from_quiz=self.backward_from_quiz + other.backward_from_quiz,
            forward_to_quiz_window=self.forward_to_quiz_window + other.forward_to_quiz_window,
            chains_not_crossing=self.chains_not_crossing + other.chains_not_crossing,
            forward_quiz_crossings=self.forward_quiz_crossings + other.forward_quiz_crossings,
            forward_skip_seconds=self.forward_skip_seconds + other.forward_skip_seconds,
            quiz_count=self.quiz_count + other.quiz_count,
            duration_s=self.duration_s + other.duration_s,
        )


@dataclass(frozen=True)
class RewatchTally:
    finished_users: int = 0
    rewatch_users: int = 0

    def merge(self, other: "RewatchTally") -> "RewatchTally":
        return RewatchTally(
            finished_users=self.finished_users + other.finished_users,
            rewatch_users=self.rewatch_users + other.rewatch_users,
        )


def build_chains(
    events: Sequence[InteractionEvent],
    merge_threshold_ms: int = MERGE_THRESHOLD_MS,
    drop_zero_displacement: bool = True,
) -> list[SeekChain]:
    """Group one user's seeks on one video into chains.

    Consecutive seeks merge while the gap to the previous seek is strictly
    below the threshold; a gap of exactly the threshold starts a new chain.
    Input must be video_seek events for a single user and video, ordered by
    at_ms; anything else is rejected.
    """
    chains: list[SeekChain] = []
    prev: InteractionEvent | None = None
    current: SeekChain | None = None
    for ev in events:
        if ev.kind is not EventKind.VIDEO_SEEK:
            raise ValueError(f"event {ev.event_id}: expected video_seek, got {ev.kind.value}")
        if prev is not None:
            if ev.user_id != prev.user_id or ev.payload["video_id"] != prev.payload["video_id"]:
                raise ValueError("build_chains expects events for a single user and video")
            if ev.at_ms < prev.at_ms:
                raise ValueError(f"event {ev.event_id}: events not ordered by at_ms")
        to_s = int(ev.payload["to_s"])
        from_s = int(ev.payload["from_s"])
        if current is not None and prev is not None and ev.at_ms - prev.at_ms < merge_threshold_ms:
            current = replace(current, dest_s=to_s)
        else:
            if current is not None:
                chains.append(current)
            current = SeekChain(
                user_id=ev.user_id,
                video_id=str(ev.payload["video_id"]),
                source_s=from_s,
                dest_s=to_s,
                started_at_ms=ev.at_ms,
            )
        prev = ev
    if current is not None:
        chains.append(current)
    if drop_zero_displacement:
        chains = [c for c in chains if c.source_s != c.dest_s]
    return chains


def quizzes_between(source_s: int, dest_s: int, quizzes: Sequence[int]) -> tuple[int, ...]:
    """Quiz positions strictly between the two endpoints."""
    lo, hi = min(source_s, dest_s), max(source_s, dest_s)
    left = bisect.bisect_right(quizzes, lo)
    right = bisect.bisect_left(quizzes, hi)
    return tuple(quizzes[left:right])


def annotate_chain(chain: SeekChain, quizzes: Sequence[int]) -> SeekChain:
    return replace(chain, crossed_quizzes=quizzes_between(chain.source_s, chain.dest_s, quizzes))


def classify_chain(
    chain: SeekChain,
    quizzes: Sequence[int],
    quiz_window_s: int = QUIZ_WINDOW_S,
) -> ChainClassification:
    """Independent flags for one chain against sorted quiz positions.

    starts_at_quiz: the source sits at a quiz or within the window after it
    (the playhead parks at the quiz while answering). ends_in_quiz_window:
    a forward chain landing at a quiz or within the window before it.
    crosses_quiz: any quiz strictly between the endpoints.
    """
    if list(quizzes) != sorted(quizzes):
        raise ValueError("quiz positions must be sorted ascending")
    starts = any(q <= chain.source_s <= q + quiz_window_s for q in quizzes)
    ends = chain.dest_s > chain.source_s and any(
        q - quiz_window_s <= chain.dest_s <= q for q in quizzes
    )
    crossed = quizzes_between(chain.source_s, chain.dest_s, quizzes)
    return ChainClassification(
        starts_at_quiz=starts,
        ends_in_quiz_window=ends,
        crosses_quiz=bool(crossed),
        crossed_quizzes=crossed,
    )


def tally_chains(
    chains: Iterable[SeekChain],
    quizzes: Sequence[int],
    duration_s: int,
    quiz_window_s: int = QUIZ_WINDOW_S,
    zero_displacement_dropped: int = 0,
) -> SeekTally:
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    tally = dict(
        total_chains=0,
        zero_displacement_dropped=zero_displacement_dropped,
        backward_chains=0,
        forward_chains=0,
        backward_from_quiz=0,
        forward_to_quiz_window=0,
        chains_not_crossing=0,
        forward_quiz_crossings=0,
        forward_skip_seconds=0,
        quiz_count=len(quizzes),
        duration_s=duration_s,
    )
    for chain in chains:
        cls = classify_chain(chain, quizzes, quiz_window_s)
        tally["total_chains"] += 1
        if chain.direction == "backward":
            tally["backward_chains"] += 1
            if cls.starts_at_quiz:
                tally["backward_from_quiz"] += 1
        else:
            tally["forward_chains"] += 1
            if cls.ends_in_quiz_window:
                tally["forward_to_quiz_window"] += 1
            tally["forward_quiz_crossings"] += len(cls.crossed_quizzes)
            tally["forward_skip_seconds"] += chain.dest_s - chain.source_s
        if not cls.crosses_quiz:
            tally["chains_not_crossing"] += 1
    return SeekTally(**tally)


def rewatch_tally(per_user_open_counts: Mapping[str, VideoOpenSummary]) -> RewatchTally:
    finished = [s for s in per_user_open_counts.values() if s.finished]
    return RewatchTally(
        finished_users=len(finished),
        rewatch_users=sum(1 for s in finished if s.opens >= 2),
    )


def stats_from_tallies(seek: SeekTally, rewatch: RewatchTally) -> SeekStats:
    def ratio(num: float, den: float) -> float | None:
        return num / den if den else None

    backward_from_quiz_fraction = ratio(seek.backward_from_quiz, seek.backward_chains)
    forward_to_window_fraction = ratio(seek.forward_to_quiz_window, seek.forward_chains)
    not_crossing_fraction = ratio(seek.chains_not_crossing, seek.total_chains)

    per_quiz_backward = None
    if seek.quiz_count and seek.backward_chains and seek.duration_s:
        per_quiz_backward = (seek.backward_from_quiz / seek.quiz_count) / (
            seek.backward_chains / seek.duration_s
        )
    forward_cross = None
    if seek.quiz_count and seek.forward_skip_seconds and seek.duration_s:
        forward_cross = (seek.forward_quiz_crossings / seek.quiz_count) / (
            seek.forward_skip_seconds / seek.duration_s
        )
    return SeekStats(
        total_chains=seek.total_chains,
        backward_from_quiz_fraction=backward_from_quiz_fraction,
        forward_to_quiz_window_fraction=forward_to_window_fraction,
        chains_not_crossing_quiz_fraction=not_crossing_fraction,
        per_quiz_backward_rate_ratio=per_quiz_backward,
        forward_cross_rate_ratio=forward_cross,
        rewatch_fraction=ratio(rewatch.rewatch_users, rewatch.finished_users),
    )


def compute_stats(
    chains: Iterable[SeekChain],
    quizzes: Sequence[int],
    video_duration_s: int,
    per_user_open_counts: Mapping[str, VideoOpenSummary],
    quiz_window_s: int = QUIZ_WINDOW_S,
) -> SeekStats:
    """Quiz-relative seeking statistics for one video.

    Rate ratios compare per-quiz counts against the per-second-of-video
    baseline: a ratio of 55 means a quiz attracts 55 times the backward
    seeking an average second does. Fields whose denominator is zero are
    None (undefined), never 0.
    """
    seek = tally_chains(chains, quizzes, video_duration_s, quiz_window_s)
    return stats_from_tallies(seek, rewatch_tally(per_user_open_counts))


# --- figure-ready tables -----------------------------------------------------


@dataclass(frozen=True)
class FigureData:
    """Delimited-table-ready chain data for one video.

    scatter holds one (source_s, dest_s) row per chain; destination_counts
    counts chains landing on each second; skip_counts counts, per second,
    the forward chains that skip over it (a chain s -> d covers [s, d)).
    """

    scatter: tuple[tuple[int, int], ...]
    destination_counts: tuple[int, ...]
    skip_counts: tuple[int, ...]
    quiz_positions: tuple[int, ...]


def emit_figure_data(
    chains: Sequence[SeekChain],
    quizzes: Sequence[int],
    duration_s: int | None = None,
) -> FigureData:
    if duration_s is None:
        positions = [c.source_s for c in chains] + [c.dest_s for c in chains] + list(quizzes)
        duration_s = max(positions) + 1 if positions else 0
    dest = [0] * duration_s
    skip = [0] * duration_s
    for chain in chains:
        if chain.dest_s < duration_s:
            dest[chain.dest_s] += 1
        if chain.dest_s > chain.source_s:
            for s in range(chain.source_s, min(chain.dest_s, duration_s)):
                skip[s] += 1
    return FigureData(
        scatter=tuple((c.source_s, c.dest_s) for c in chains),
        destination_counts=tuple(dest),
        skip_counts=tuple(skip),
        quiz_positions=tuple(quizzes),
    )
