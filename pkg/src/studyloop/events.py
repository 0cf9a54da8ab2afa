"""Append-only interaction event log: the system of record.

Every learner interaction is one immutable record. Session state is never
persisted directly; it is reconstructed by replaying a user's events, so a
replay of the log always equals the live state it recorded.

Storage is one JSON record per line, one file per user session, ending with
an integrity footer holding the record count. Files without a footer (a
session that never closed) are still readable.

Watch coverage derives from the video events alone:

* video_play opens a playback span at its position; a further video_play
  while a span is open is a heartbeat checkpoint and marks the seconds
  travelled since the span opened;
* video_pause marks the remaining span and closes it;
* video_seek moves an open span's origin without marking anything;
* session_start closes any span left dangling by a crashed session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .course import CourseManifest
from .scheduler import StudyState, fresh_state


class EventKind(str, Enum):
    SESSION_START = "session_start"
    QUESTION_SHOWN = "question_shown"
    ANSWER_SUBMIT = "answer_submit"
    VIDEO_PLAY = "video_play"
    VIDEO_PAUSE = "video_pause"
    VIDEO_SEEK = "video_seek"
    TIMELINE_EXPAND = "timeline_expand"
    SKIP_UNSEEN_CLICK = "skip_unseen_click"


REQUIRED_PAYLOAD: dict[EventKind, tuple[str, ...]] = {
    EventKind.SESSION_START: ("session_id", "course_id"),
    EventKind.QUESTION_SHOWN: ("question_id",),
    EventKind.ANSWER_SUBMIT: ("question_id", "selected", "score"),
    EventKind.VIDEO_PLAY: ("video_id", "position_s"),
    EventKind.VIDEO_PAUSE: ("video_id", "position_s"),
    EventKind.VIDEO_SEEK: ("video_id", "from_s", "to_s"),
    EventKind.TIMELINE_EXPAND: ("question_id",),
    EventKind.SKIP_UNSEEN_CLICK: ("video_id", "from_s", "to_s"),
}


class EventLogError(ValueError):
    """An event failed validation or a log file failed its integrity check."""


class ReplayError(ValueError):
    """An event could not be applied during replay; names the event."""


@dataclass(frozen=True)
class InteractionEvent:
    event_id: int
    user_id: str
    at_ms: int
    kind: EventKind
    payload: Mapping[str, Any] = field(default_factory=dict)


def validate_event(ev: InteractionEvent, prev: InteractionEvent | None) -> None:
    """Check payload completeness and per-user monotonicity against the
    user's previous event. Raises EventLogError on the first violation."""
    required = REQUIRED_PAYLOAD[ev.kind]
    for key in required:
        if ev.payload.get(key) is None:
            raise EventLogError(
                f"event {ev.event_id}: {ev.kind.value} payload missing {key!r}"
            )
    if prev is not None:
        if ev.user_id != prev.user_id:
            raise EventLogError("validate_event: previous event is for another user")
        if ev.event_id <= prev.event_id:
            raise EventLogError(
                f"event {ev.event_id}: event_id must exceed previous id {prev.event_id}"
            )
        if ev.at_ms < prev.at_ms:
            raise EventLogError(
                f"event {ev.event_id}: at_ms {ev.at_ms} precedes previous {prev.at_ms}"
            )
    elif ev.event_id < 1:
        raise EventLogError(f"event {ev.event_id}: event ids start at 1")


class EventLog:
    """In-memory append-only log covering any number of users."""

    def __init__(self, events: Iterable[InteractionEvent] = ()) -> None:
        self._events: list[InteractionEvent] = []
        self._last_by_user: dict[str, InteractionEvent] = {}
        for ev in events:
            self.append(ev)

    def append(self, ev: InteractionEvent) -> None:
        validate_event(ev, self._last_by_user.get(ev.user_id))
        self._events.append(ev)
        self._last_by_user[ev.user_id] = ev

    def events(self) -> tuple[InteractionEvent, ...]:
        return tuple(self._events)

    def events_for(self, user_id: str) -> list[InteractionEvent]:
        return [ev for ev in self._events if ev.user_id == user_id]

    def last_event(self, user_id: str) -> InteractionEvent | None:
        return self._last_by_user.get(user_id)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(self._events)


# --- line-record persistence ------------------------------------------------

FOOTER_KEY = "record_count"


def event_to_record(ev: InteractionEvent) -> dict[str, Any]:
    return {
        "event_id": ev.event_id,
        "user_id": ev.user_id,
        "at_ms": ev.at_ms,
        "kind": ev.kind.value,
        "payload": dict(ev.payload),
    }


def event_from_record(d: Mapping[str, Any]) -> InteractionEvent:
    return InteractionEvent(
        event_id=int(d["event_id"]),
        user_id=d["user_id"],
        at_ms=int(d["at_ms"]),
        kind=EventKind(d["kind"]),
        payload=dict(d.get("payload", {})),
    )


class SessionLogWriter:
    """Writes one session's events to a file, one JSON record per line.

    seal() appends the integrity footer and closes the file; a writer left
    unsealed (crash) produces a file that readers still accept.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8")
        self._count = 0
        self._sealed = False

    def append(self, ev: InteractionEvent) -> None:
        if self._sealed:
            raise EventLogError(f"{self.path}: log already sealed")
        self._fh.write(json.dumps(event_to_record(ev), sort_keys=True) + "\n")
        self._fh.flush()
        self._count += 1

    def seal(self) -> None:
        if self._sealed:
            return
        self._fh.write(json.dumps({FOOTER_KEY: self._count}) + "\n")
        self._fh.close()
        self._sealed = True

    @property
    def record_count(self) -> int:
        return self._count

    def __enter__(self) -> "SessionLogWriter":
        return self

    def __exit__(self, *exc: object) -> None:
        self.seal()


def write_log_file(path: str | Path, events: Sequence[InteractionEvent], seal: bool = True) -> None:
    writer = SessionLogWriter(path)
    for ev in events:
        writer.append(ev)
    if seal:
        writer.seal()
    else:
        writer._fh.close()


def read_log_file(path: str | Path) -> list[InteractionEvent]:
    """Read one session file, verifying the footer when present and
    per-user monotonicity of the records."""
    events: list[InteractionEvent] = []
    footer_count: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if footer_count is not None:
                raise EventLogError(f"{path}:{lineno}: records after the footer")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EventLogError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if FOOTER_KEY in record:
                footer_count = int(record[FOOTER_KEY])
            else:
                events.append(event_from_record(record))
    if footer_count is not None and footer_count != len(events):
        raise EventLogError(
            f"{path}: footer says {footer_count} records, file holds {len(events)}"
        )
    last_by_user: dict[str, InteractionEvent] = {}
    for ev in events:
        validate_event(ev, last_by_user.get(ev.user_id))
        last_by_user[ev.user_id] = ev
    return events


# --- replay ------------------------------------------------------------------


def events_for_course(events: Iterable[InteractionEvent], course_id: str) -> list[InteractionEvent]:
    """Events belonging to sessions on the given course.

    Session membership follows the most recent session_start; events before
    any session_start (hand-built logs may omit it) are kept for any course.
    """
    out: list[InteractionEvent] = []
    current: str | None = None
    for ev in events:
        if ev.kind is EventKind.SESSION_START:
            current = str(ev.payload["course_id"])
        if current is None or current == course_id:
            out.append(ev)
    return out


def replay(events: Iterable[InteractionEvent], user_id: str, course: CourseManifest) -> StudyState:
    """Rebuild a user's StudyState by applying their events in order.

    Events for other users are skipped. References that do not resolve in
    the course, or playback records that could not have come from a live
    session, raise ReplayError naming the event.
    """
    state = fresh_state(user_id, course)
    open_pos: dict[str, int] = {}

    def check_video(ev: InteractionEvent) -> str:
        vid = str(ev.payload["video_id"])
        if not course.has_video(vid):
            raise ReplayError(f"event {ev.event_id}: unknown video {vid}")
        return vid

    for ev in events:
        if ev.user_id != user_id:
            continue
        if ev.kind is EventKind.SESSION_START:
            open_pos.clear()
        elif ev.kind is EventKind.ANSWER_SUBMIT:
            qid = str(ev.payload["question_id"])
            if not course.has_question(qid):
                raise ReplayError(f"event {ev.event_id}: unknown question {qid}")
            selected = tuple(bool(x) for x in ev.payload["selected"])
            state.record_attempt(qid, selected, float(ev.payload["score"]), ev.at_ms)
        elif ev.kind is EventKind.VIDEO_PLAY:
            vid = check_video(ev)
            pos = int(ev.payload["position_s"])
            opened = open_pos.get(vid)
            if opened is not None:
                if pos < opened:
                    raise ReplayError(
                        f"event {ev.event_id}: playhead moved backward "
                        f"({opened} to {pos}) without a seek"
                    )
                _mark(state, ev, vid, opened, pos)
            open_pos[vid] = pos
        elif ev.kind is EventKind.VIDEO_PAUSE:
            vid = check_video(ev)
            pos = int(ev.payload["position_s"])
            opened = open_pos.pop(vid, None)
            if opened is not None:
                if pos < opened:
                    raise ReplayError(
                        f"event {ev.event_id}: pause at {pos} precedes "
                        f"open span at {opened}"
                    )
                _mark(state, ev, vid, opened, pos)
        elif ev.kind is EventKind.VIDEO_SEEK:
            vid = check_video(ev)
            if vid in open_pos:
                open_pos[vid] = int(ev.payload["to_s"])
        elif ev.kind is EventKind.SKIP_UNSEEN_CLICK:
            vid = check_video(ev)
            if vid in open_pos:
                open_pos[vid] = int(ev.payload["to_s"])
        elif ev.kind is EventKind.QUESTION_SHOWN:
            qid = str(ev.payload["question_id"])
            if not course.has_question(qid):
                raise ReplayError(f"event {ev.event_id}: unknown question {qid}")
        elif ev.kind is EventKind.TIMELINE_EXPAND:
            qid = str(ev.payload["question_id"])
            if not course.has_question(qid):
                raise ReplayError(f"event {ev.event_id}: unknown question {qid}")
    return state


def _mark(state: StudyState, ev: InteractionEvent, video_id: str, from_s: int, to_s: int) -> None:
    try:
        state.mark_watched(video_id, from_s, to_s)
    except ValueError as exc:
        raise ReplayError(f"event {ev.event_id}: {exc}") from exc


# --- tallies ------------------------------------------------------------------


@dataclass(frozen=True)
class EventCounts:
    by_kind: dict[str, int]
    attempts_by_question: dict[str, int]
    total_attempts: int
    correct_attempts: int
    correct_answer_rate: float
    seek_count: int
    timeline_expansions: int


def event_counts(events: Iterable[InteractionEvent], user_id: str) -> EventCounts:
    """Exact per-kind and per-question tallies for one user."""
    by_kind = {kind.value: 0 for kind in EventKind}
    attempts_by_question: dict[str, int] = {}
    total = 0
    correct = 0
    for ev in events:
        if ev.user_id != user_id:
            continue
        by_kind[ev.kind.value] += 1
        if ev.kind is EventKind.ANSWER_SUBMIT:
            qid = str(ev.payload["question_id"])
            attempts_by_question[qid] = attempts_by_question.get(qid, 0) + 1
            total += 1
            if float(ev.payload["score"]) == 1.0:
                correct += 1
    return EventCounts(
        by_kind=by_kind,
        attempts_by_question=attempts_by_question,
        total_attempts=total,
        correct_attempts=correct,
        correct_answer_rate=correct / total if total else 0.0,
        seek_count=by_kind[EventKind.VIDEO_SEEK.value],
        timeline_expansions=by_kind[EventKind.TIMELINE_EXPAND.value],
    )
