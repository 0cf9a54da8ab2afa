"""Stateful study-session service.

Holds live sessions, scores answers, tracks watch progress, and persists
every interaction through the event store. Live state is always equal to a
replay of the user's event log: answers use the timestamps the store
assigned, and watch marks mirror the replay rules exactly.

Command processing is serialized per user; reads hand out immutable
snapshots. Starting a new session for a user retires any session they
already had open.

Watch reports follow a span protocol. A play opens a span at the playhead;
heartbeats (at most 5 s of playhead movement) and the final pause each
cover [from_s, to_s) where from_s must be the span's current origin; seeks
move an open span's origin without covering anything.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .course import (
    CourseManifest,
    Question,
    QuestionKind,
    Segment,
    load_manifest,
    validate_manifest,
)
from .coverage import Region, coverage_regions, next_unseen
from .events import (
    EventKind,
    InteractionEvent,
    SessionLogWriter,
    events_for_course,
    read_log_file,
    replay,
    validate_event,
)
from .scheduler import (
    InitialPassIncomplete,
    MasteryScore,
    SchedulerConfig,
    StudyState,
    mastery,
    next_question,
    review_list,
    score_attempt,
)

HEARTBEAT_CAP_S = 5

MODE_INITIAL_PASS = "initial_pass"
MODE_REVIEW = "review"

_USER_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")

WATCH_ACTIONS = ("play", "pause", "seek", "heartbeat")


class NotFoundError(KeyError):
    """Unknown course, session, video, or question."""


class StaleQuestionError(Exception):
    """The client answered a question that is no longer current."""

    def __init__(self, submitted: str, current: str) -> None:
        super().__init__(
            f"question {submitted} is not current; the session is on {current}"
        )
        self.submitted = submitted
        self.current = current


class InvalidWatchReport(ValueError):
    """A watch-progress report broke the span protocol or video bounds."""


@dataclass
class Session:
    session_id: str
    user_id: str
    course_id: str
    current_question_id: str
    mode: str
    created_at_ms: int


@dataclass(frozen=True)
class SegmentView:
    segment_id: str
    video_id: str
    video_title: str
    video_url: str | None
    video_duration_s: int
    start_s: int
    end_s: int


@dataclass(frozen=True)
class QuestionView:
    question_id: str
    prompt: str
    kind: str
    options: tuple[str, ...]
    segments: tuple[SegmentView, ...]


@dataclass(frozen=True)
class SessionView:
    session_id: str
    user_id: str
    course_id: str
    mode: str
    created_at_ms: int
    initial_pass_complete: bool
    question: QuestionView


@dataclass(frozen=True)
class AnswerResult:
    score: float
    correct: bool
    advanced: bool
    session: SessionView


@dataclass(frozen=True)
class TimelineEntry:
    question_id: str
    prompt: str
    answered_correctly: bool
    latest_score: float
    segment_refs: tuple[str, ...]
    resume_position_s: dict[str, int]
    answered_at_ms: int


@dataclass(frozen=True)
class ReviewEntry:
    question_id: str
    prompt: str
    mastery: MasteryScore


def _wall_ms() -> int:
    return time.time_ns() // 1_000_000


class EventStore:
    """Per-user append streams, one file per session under root/<user>/.

    Assigns event ids (strictly increasing per user, across sessions) and
    clamps timestamps so the log never runs backward even if the OS clock
    does. With no root directory the store is memory-only.
    """

    def __init__(self, root: str | Path | None = None) -> None:
        self._root = Path(root) if root is not None else None
        self._events: dict[str, list[InteractionEvent]] = {}
        self._writers: dict[str, SessionLogWriter] = {}

    def _load(self, user_id: str) -> list[InteractionEvent]:
        if user_id not in self._events:
            events: list[InteractionEvent] = []
            if self._root is not None:
                user_dir = self._root / user_id
                if user_dir.is_dir():
                    for path in sorted(user_dir.glob("*.jsonl")):
                        events.extend(read_log_file(path))
                    events.sort(key=lambda ev: ev.event_id)
            self._events[user_id] = events
        return self._events[user_id]

    def events_for(self, user_id: str) -> list[InteractionEvent]:
        return list(self._load(user_id))

    def begin_session(self, user_id: str, session_id: str) -> None:
        self._load(user_id)
        old = self._writers.pop(user_id, None)
        if old is not None:
            old.seal()
        if self._root is not None:
            self._writers[user_id] = SessionLogWriter(
                self._root / user_id / f"{session_id}.jsonl"
            )

    def append(self, user_id: str, kind: EventKind, at_ms: int, payload: dict) -> InteractionEvent:
        events = self._load(user_id)
        last = events[-1] if events else None
        ev = InteractionEvent(
            event_id=last.event_id + 1 if last else 1,
            user_id=user_id,
            at_ms=max(at_ms, last.at_ms) if last else at_ms,
            kind=kind,
            payload=dict(payload),
        )
        validate_event(ev, last)
        events.append(ev)
        writer = self._writers.get(user_id)
        if writer is not None:
            writer.append(ev)
        return ev

    def close(self) -> None:
        for writer in self._writers.values():
            writer.seal()
        self._writers.clear()


@dataclass
class _LiveSession:
    session: Session
    state: StudyState
    open_spans: dict[str, int] = field(default_factory=dict)


class StudyService:
    def __init__(
        self,
        courses: Iterable[CourseManifest],
        scheduler_config: SchedulerConfig | None = None,
        storage_dir: str | Path | None = None,
        clock: Callable[[], int] | None = None,
    ) -> None:
        self._courses = {c.course_id: c for c in courses}
        self._cfg = scheduler_config or SchedulerConfig()
        self._store = EventStore(storage_dir)
        self._clock = clock or _wall_ms
        self._sessions: dict[str, _LiveSession] = {}
        self._registry_lock = threading.Lock()
        self._user_locks: dict[str, threading.Lock] = {}

    # -- plumbing -------------------------------------------------------

    def course(self, course_id: str) -> CourseManifest:
        try:
            return self._courses[course_id]
        except KeyError:
            raise NotFoundError(f"unknown course {course_id}") from None

    def _user_lock(self, user_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._user_locks.setdefault(user_id, threading.Lock())

    def _live(self, session_id: str) -> _LiveSession:
        with self._registry_lock:
            live = self._sessions.get(session_id)
        if live is None:
            raise NotFoundError(f"unknown session {session_id}")
        return live

    def _question_view(self, course: CourseManifest, question_id: str) -> QuestionView:
        q = course.question(question_id)
        segments = []
        for ref in q.segment_refs:
            seg = course.segment(ref)
            video = course.video(seg.video_id)
            segments.append(
                SegmentView(
                    segment_id=seg.segment_id,
                    video_id=video.video_id,
                    video_title=video.title,
                    video_url=video.url,
                    video_duration_s=video.duration_s,
                    start_s=seg.start_s,
                    end_s=seg.end_s,
                )
            )
        return QuestionView(
            question_id=q.question_id,
            prompt=q.prompt,
            kind=q.kind.value,
            options=tuple(o.text for o in q.options),
            segments=tuple(segments),
        )

    def _view(self, live: _LiveSession) -> SessionView:
        course = self.course(live.session.course_id)
        return SessionView(
            session_id=live.session.session_id,
            user_id=live.session.user_id,
            course_id=live.session.course_id,
            mode=live.session.mode,
            created_at_ms=live.session.created_at_ms,
            initial_pass_complete=live.state.initial_pass_complete(),
            question=self._question_view(course, live.session.current_question_id),
        )

    def _mode(self, state: StudyState) -> str:
        return MODE_REVIEW if state.initial_pass_complete() else MODE_INITIAL_PASS

    # -- session lifecycle ------------------------------------------------

    def start_session(self, user_id: str, course_id: str) -> SessionView:
        if not _USER_ID_RE.match(user_id):
            raise ValueError(
                f"user id {user_id!r} must match {_USER_ID_RE.pattern}"
            )
        course = self.course(course_id)
        with self._user_lock(user_id):
            now = self._clock()
            history = events_for_course(self._store.events_for(user_id), course_id)
            state = replay(history, user_id, course)
            session_id = f"{now:013d}-{uuid.uuid4().hex[:8]}"
            self._store.begin_session(user_id, session_id)
            start_ev = self._store.append(
                user_id,
                EventKind.SESSION_START,
                now,
                {"session_id": session_id, "course_id": course_id},
            )
            current = next_question(state, self._cfg, now)
            self._store.append(
                user_id, EventKind.QUESTION_SHOWN, now, {"question_id": current}
            )
            live = _LiveSession(
                session=Session(
                    session_id=session_id,
                    user_id=user_id,
                    course_id=course_id,
                    current_question_id=current,
                    mode=self._mode(state),
                    created_at_ms=start_ev.at_ms,
                ),
                state=state,
            )
            with self._registry_lock:
                # one live session per user: starting anew retires the old one
                stale = [
                    sid
                    for sid, s in self._sessions.items()
                    if s.session.user_id == user_id
                ]
                for sid in stale:
                    del self._sessions[sid]
                self._sessions[session_id] = live
            return self._view(live)

    def session_view(self, session_id: str) -> SessionView:
        return self._view(self._live(session_id))

    def current_question(self, session_id: str) -> QuestionView:
        live = self._live(session_id)
        return self._question_view(
            self.course(live.session.course_id), live.session.current_question_id
        )

    # -- answering --------------------------------------------------------

    def submit_answer(
        self, session_id: str, question_id: str, selected: Sequence[bool]
    ) -> AnswerResult:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        with self._user_lock(live.session.user_id):
            if question_id != live.session.current_question_id:
                raise StaleQuestionError(question_id, live.session.current_question_id)
            q = course.question(question_id)
            score = score_attempt(q, selected)
            now = self._clock()
            ev = self._store.append(
                live.session.user_id,
                EventKind.ANSWER_SUBMIT,
                now,
                {
                    "question_id": question_id,
                    "selected": [bool(x) for x in selected],
                    "score": score,
                },
            )
            live.state.record_attempt(question_id, selected, score, ev.at_ms)
            live.session.mode = self._mode(live.state)
            correct = score == 1.0
            advanced = correct or q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT
            if advanced:
                current = next_question(live.state, self._cfg, now)
                live.session.current_question_id = current
                self._store.append(
                    live.session.user_id,
                    EventKind.QUESTION_SHOWN,
                    now,
                    {"question_id": current},
                )
            return AnswerResult(
                score=score, correct=correct, advanced=advanced, session=self._view(live)
            )

    # -- watching -----------------------------------------------------------

    def report_watch(
        self, session_id: str, video_id: str, from_s: int, to_s: int, action: str
    ) -> list[Region]:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if not course.has_video(video_id):
            raise NotFoundError(f"unknown video {video_id}")
        if action not in WATCH_ACTIONS:
            raise InvalidWatchReport(f"unknown action {action!r}")
        duration = course.video(video_id).duration_s
        if not (0 <= from_s <= duration and 0 <= to_s <= duration):
            raise InvalidWatchReport(
                f"interval [{from_s},{to_s}] outside video bounds [0,{duration}]"
            )
        user_id = live.session.user_id
        with self._user_lock(user_id):
            now = self._clock()
            open_at = live.open_spans.get(video_id)
            if action == "play":
                if from_s != to_s:
                    raise InvalidWatchReport("play reports a single position (from_s == to_s)")
                if open_at is not None:
                    raise InvalidWatchReport(
                        f"video {video_id} already has an open span at {open_at}"
                    )
                self._store.append(
                    user_id,
                    EventKind.VIDEO_PLAY,
                    now,
                    {"video_id": video_id, "position_s": to_s},
                )
                live.open_spans[video_id] = to_s
            elif action == "heartbeat":
                self._check_span(video_id, open_at, from_s, to_s)
                if to_s - from_s > HEARTBEAT_CAP_S:
                    raise InvalidWatchReport(
                        f"heartbeat span {to_s - from_s} s exceeds the "
                        f"{HEARTBEAT_CAP_S} s cap"
                    )
                self._store.append(
                    user_id,
                    EventKind.VIDEO_PLAY,
                    now,
                    {"video_id": video_id, "position_s": to_s},
                )
                live.state.mark_watched(video_id, from_s, to_s)
                live.open_spans[video_id] = to_s
            elif action == "pause":
                self._check_span(video_id, open_at, from_s, to_s)
                self._store.append(
                    user_id,
                    EventKind.VIDEO_PAUSE,
                    now,
                    {"video_id": video_id, "position_s": to_s},
                )
                live.state.mark_watched(video_id, from_s, to_s)
                del live.open_spans[video_id]
            else:  # seek
                self._store.append(
                    user_id,
                    EventKind.VIDEO_SEEK,
                    now,
                    {"video_id": video_id, "from_s": from_s, "to_s": to_s},
                )
                if open_at is not None:
                    live.open_spans[video_id] = to_s
            return self._regions(live, course, video_id)

    def _check_span(self, video_id: str, open_at: int | None, from_s: int, to_s: int) -> None:
        if open_at is None:
            raise InvalidWatchReport(f"video {video_id} has no open playback span")
        if from_s != open_at:
            raise InvalidWatchReport(
                f"span start {from_s} does not match the open span at {open_at}"
            )
        if to_s < from_s:
            raise InvalidWatchReport("span end precedes its start")

    def _regions(
        self, live: _LiveSession, course: CourseManifest, video_id: str
    ) -> list[Region]:
        current = course.question(live.session.current_question_id)
        part: Segment | None = None
        for ref in reversed(current.segment_refs):
            seg = course.segment(ref)
            if seg.video_id == video_id:
                part = seg
                break
        return coverage_regions(live.state.coverage_for(video_id), part)

    def watch_regions(self, session_id: str, video_id: str) -> list[Region]:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if not course.has_video(video_id):
            raise NotFoundError(f"unknown video {video_id}")
        return self._regions(live, course, video_id)

    # -- timeline and review ---------------------------------------------

    def get_timeline(self, session_id: str) -> list[TimelineEntry]:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        latest: dict[str, tuple[int, float, int]] = {}
        advanced: set[str] = set()
        for index, attempt in enumerate(live.state.attempts):
            latest[attempt.question_id] = (index, attempt.score, attempt.at_ms)
            q = course.question(attempt.question_id)
            if attempt.score == 1.0 or q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT:
                advanced.add(attempt.question_id)
        entries: list[tuple[int, TimelineEntry]] = []
        for question_id in advanced:
            index, score, at_ms = latest[question_id]
            q = course.question(question_id)
            resume = {}
            for ref in q.segment_refs:
                vid = course.segment(ref).video_id
                resume[vid] = live.state.coverage_for(vid).last_position_s
            entries.append(
                (
                    index,
                    TimelineEntry(
                        question_id=question_id,
                        prompt=q.prompt,
                        answered_correctly=score == 1.0,
                        latest_score=score,
                        segment_refs=q.segment_refs,
                        resume_position_s=resume,
                        answered_at_ms=at_ms,
                    ),
                )
            )
        entries.sort(key=lambda pair: pair[0], reverse=True)
        return [entry for _, entry in entries]

    def get_review(self, session_id: str) -> list[ReviewEntry]:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if live.session.mode != MODE_REVIEW:
            raise InitialPassIncomplete(
                f"session {session_id} has not completed the initial pass"
            )
        now = self._clock()
        ordered = review_list(live.state, self._cfg, now)
        entries = []
        for question_id in ordered:
            q = course.question(question_id)
            entries.append(
                ReviewEntry(
                    question_id=question_id,
                    prompt=q.prompt,
                    mastery=mastery(q, live.state, self._cfg, now),
                )
            )
        return entries

    # -- skipping -----------------------------------------------------------

    def get_skip_target(self, session_id: str, video_id: str, position_s: int) -> int | None:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if not course.has_video(video_id):
            raise NotFoundError(f"unknown video {video_id}")
        duration = course.video(video_id).duration_s
        if not 0 <= position_s <= duration:
            raise InvalidWatchReport(
                f"position {position_s} outside video bounds [0,{duration}]"
            )
        return next_unseen(live.state.coverage_for(video_id), position_s)

    def log_skip_click(self, session_id: str, video_id: str, from_s: int, to_s: int) -> None:
        """Record that the learner used the skip-to-unseen button."""
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if not course.has_video(video_id):
            raise NotFoundError(f"unknown video {video_id}")
        with self._user_lock(live.session.user_id):
            self._store.append(
                live.session.user_id,
                EventKind.SKIP_UNSEEN_CLICK,
                self._clock(),
                {"video_id": video_id, "from_s": from_s, "to_s": to_s},
            )
            if video_id in live.open_spans:
                live.open_spans[video_id] = to_s

    def log_timeline_expand(self, session_id: str, question_id: str) -> None:
        live = self._live(session_id)
        course = self.course(live.session.course_id)
        if not course.has_question(question_id):
            raise NotFoundError(f"unknown question {question_id}")
        with self._user_lock(live.session.user_id):
            self._store.append(
                live.session.user_id,
                EventKind.TIMELINE_EXPAND,
                self._clock(),
                {"question_id": question_id},
            )

    # -- diagnostics ----------------------------------------------------------

    def study_state(self, session_id: str) -> StudyState:
        """The live state backing a session (for tests and diagnostics)."""
        return self._live(session_id).state

    def user_events(self, user_id: str) -> list[InteractionEvent]:
        return self._store.events_for(user_id)

    def close(self) -> None:
        self._store.close()


# --- configuration -----------------------------------------------------------


@dataclass
class ServiceConfig:
    storage_dir: Path | None
    course_files: tuple[Path, ...]
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    ui_dir: Path | None = None
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)


def load_service_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    scheduler = SchedulerConfig(**doc.get("scheduler", {}))
    return ServiceConfig(
        storage_dir=resolve(doc["storage_dir"]) if doc.get("storage_dir") else None,
        course_files=tuple(resolve(p) for p in doc.get("course_files", [])),
        listen_host=doc.get("listen_host", "127.0.0.1"),
        listen_port=int(doc.get("listen_port", 8000)),
        ui_dir=resolve(doc["ui_dir"]) if doc.get("ui_dir") else None,
        scheduler=scheduler,
    )


def service_from_config(cfg: ServiceConfig) -> StudyService:
    courses = []
    for path in cfg.course_files:
        manifest = load_manifest(path)
        violations = validate_manifest(manifest)
        if violations:
            listing = "; ".join(violations[:5])
            raise ValueError(f"{path}: manifest invalid: {listing}")
        courses.append(manifest)
    return StudyService(
        courses=courses,
        scheduler_config=cfg.scheduler,
        storage_dir=cfg.storage_dir,
    )
