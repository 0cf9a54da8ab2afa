"""Attempt scoring, mastery scores, and review scheduling.

A question's mastery combines three factors, each in [0, 1]:

* performance: decayed weighted mean of past attempt scores, recent
  attempts weighing more;
* watched: mean watched fraction over the question's video segments;
* recency: hyperbolic decay in time since the last attempt, so a question
  answered a moment ago scores 1 and releases for review as time passes.

Scheduling runs in two phases: until every question has been attempted
once, the next question is the first unattempted one in course order; after
that the lowest combined mastery is offered for review.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .course import CourseManifest, Question, QuestionKind
from .coverage import WatchCoverage, empty_coverage, mark_watched, watched_fraction

SIX_HOURS_MS = 6 * 60 * 60 * 1000


class InitialPassIncomplete(Exception):
    """Review was requested before every question had been attempted."""


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


@dataclass(frozen=True)
class AttemptRecord:
    user_id: str
    question_id: str
    at_ms: int
    selected: tuple[bool, ...]
    score: float


@dataclass(frozen=True)
class MasteryScore:
    question_id: str
    performance: float
    watched: float
    recency: float
    combined: float
    computed_at_ms: int


@dataclass(frozen=True)
class SchedulerConfig:
    """Weights and decay constants; weights are normalized to sum to 1."""

    performance_weight: float = 0.5
    watched_weight: float = 0.3
    recency_weight: float = 0.2
    history_decay: float = 0.5
    recency_halflife_ms: int = SIX_HOURS_MS
    review_list_length: int = 5

    def __post_init__(self) -> None:
        for name in ("performance_weight", "watched_weight", "recency_weight"):
            w = getattr(self, name)
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"{name} must be a non-negative finite number")
        total = self.performance_weight + self.watched_weight + self.recency_weight
        if total <= 0:
            raise ValueError("at least one mastery weight must be positive")
        object.__setattr__(self, "performance_weight", self.performance_weight / total)
        object.__setattr__(self, "watched_weight", self.watched_weight / total)
        object.__setattr__(self, "recency_weight", self.recency_weight / total)
        if not 0 < self.history_decay <= 1:
            raise ValueError("history_decay must be in (0, 1]")
        if self.recency_halflife_ms <= 0:
            raise ValueError("recency_halflife_ms must be positive")
        if self.review_list_length < 1:
            raise ValueError("review_list_length must be at least 1")


@dataclass
class StudyState:
    """One user's progress through a course: attempts plus watch coverage."""

    user_id: str
    course: CourseManifest
    attempts: list[AttemptRecord] = field(default_factory=list)
    coverage: dict[str, WatchCoverage] = field(default_factory=dict)

    def attempts_for(self, question_id: str) -> list[AttemptRecord]:
        return [a for a in self.attempts if a.question_id == question_id]

    def coverage_for(self, video_id: str) -> WatchCoverage:
        # Read-only: never inserts, so reads keep state equal to a log replay.
        cov = self.coverage.get(video_id)
        if cov is None:
            cov = empty_coverage(self.user_id, video_id, self.course.video(video_id).duration_s)
        return cov

    def record_attempt(self, question_id: str, selected: Sequence[bool], score: float, at_ms: int) -> AttemptRecord:
        attempt = AttemptRecord(
            user_id=self.user_id,
            question_id=question_id,
            at_ms=at_ms,
            selected=tuple(selected),
            score=score,
        )
        self.attempts.append(attempt)
        return attempt

    def mark_watched(self, video_id: str, from_s: int, to_s: int) -> WatchCoverage:
        cov = mark_watched(self.coverage_for(video_id), from_s, to_s)
        self.coverage[video_id] = cov
        return cov

    def initial_pass_complete(self, unit_id: str | None = None) -> bool:
        """True when every question (of the unit, or the whole course) has
        at least one attempt."""
        attempted = {a.question_id for a in self.attempts}
        for q in self.course.questions:
            if unit_id is not None and self.course.unit_of_question(q.question_id) != unit_id:
                continue
            if q.question_id not in attempted:
                return False
        return True


def fresh_state(user_id: str, course: CourseManifest) -> StudyState:
    return StudyState(user_id=user_id, course=course)


def score_attempt(q: Question, selected: Sequence[bool]) -> float:
    """Score one answer submission.

    Checkbox questions score the fraction of option positions whose checked
    state matches the answer key. Generic self-rating questions score the
    selected level: (level - 1) / 4, highest level winning if several are
    checked, 0 if none.
    """
    if len(selected) != len(q.options):
        raise ValueError(
            f"question {q.question_id}: got {len(selected)} selections "
            f"for {len(q.options)} options"
        )
    if q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT:
        level = max((i + 1 for i, sel in enumerate(selected) if sel), default=1)
        return (level - 1) / (len(q.options) - 1)
    matches = sum(1 for sel, opt in zip(selected, q.options) if sel == opt.correct)
    return matches / len(q.options)


def performance_score(history: Sequence[AttemptRecord], cfg: SchedulerConfig) -> float:
    """Decayed weighted mean of attempt scores, oldest to newest.

    The most recent attempt has weight 1; each step back multiplies the
    weight by history_decay. No attempts means 0.
    """
    if not history:
        return 0.0
    d = cfg.history_decay
    n = len(history)
    num = 0.0
    den = 0.0
    for i, attempt in enumerate(history):
        w = d ** (n - 1 - i)
        num += w * attempt.score
        den += w
    return _clamp01(num / den)


def recency_score(last_attempt_ms: int | None, now_ms: int, cfg: SchedulerConfig) -> float:
    """Hyperbolic decay h/(h + elapsed); 1 right after answering, 0 if never."""
    if last_attempt_ms is None:
        return 0.0
    if now_ms < last_attempt_ms:
        raise ValueError("now_ms precedes the last attempt")
    h = cfg.recency_halflife_ms
    return _clamp01(h / (h + (now_ms - last_attempt_ms)))


def watched_component(q: Question, state: StudyState) -> float:
    """Mean watched fraction across the question's referenced segments."""
    fractions = []
    for seg_id in q.segment_refs:
        seg = state.course.segment(seg_id)
        fractions.append(watched_fraction(state.coverage_for(seg.video_id), seg))
    return _clamp01(sum(fractions) / len(fractions))


def mastery(q: Question, state: StudyState, cfg: SchedulerConfig, now_ms: int) -> MasteryScore:
    history = state.attempts_for(q.question_id)
    performance = performance_score(history, cfg)
    watched = watched_component(q, state)
    last_ms = history[-1].at_ms if history else None
    recency = recency_score(last_ms, now_ms, cfg)
    combined = _clamp01(
        cfg.performance_weight * performance
        + cfg.watched_weight * watched
        + cfg.recency_weight * recency
    )
    return MasteryScore(
        question_id=q.question_id,
        performance=performance,
        watched=watched,
        recency=recency,
        combined=combined,
        computed_at_ms=now_ms,
    )


def next_question(state: StudyState, cfg: SchedulerConfig, now_ms: int) -> str:
    """Next question to offer: first unattempted in course order during the
    initial pass, lowest combined mastery afterwards (ties to course order)."""
    questions = state.course.questions_in_order()
    if not questions:
        raise ValueError("course has no questions")
    attempted = {a.question_id for a in state.attempts}
    for q in questions:
        if q.question_id not in attempted:
            return q.question_id
    scored = [(mastery(q, state, cfg, now_ms).combined, q.order_index, q.question_id) for q in questions]
    return min(scored)[2]


def review_list(state: StudyState, cfg: SchedulerConfig, now_ms: int) -> list[str]:
    """Up to review_list_length question ids, lowest combined mastery first."""
    if not state.initial_pass_complete():
        raise InitialPassIncomplete(
            f"user {state.user_id} has not attempted every question yet"
        )
    questions = state.course.questions_in_order()
    scored = [(mastery(q, state, cfg, now_ms).combined, q.order_index, q.question_id) for q in questions]
    scored.sort()
    return [qid for _, _, qid in scored[: cfg.review_list_length]]


def grade_free_response(requested: int, given: Sequence[bool]) -> float:
    """Free-response grade: correct examples over max(requested, given).

    Giving more examples than requested dilutes the denominator, so padding
    with wrong guesses cannot raise the grade.
    """
    if requested < 1:
        raise ValueError("requested must be at least 1")
    correct = sum(1 for ok in given if ok)
    return correct / max(requested, len(given))
