"""Course data model and conversion from in-video-quiz courses.

A course in studyloop format pairs every video segment with exactly one
focus question. Courses that embed quizzes at fixed positions inside their
videos are converted by splitting each video at its quiz positions: a quiz
becomes the focus question of the segment that ends where the quiz sits,
and segments left without a quiz get a generic self-rating question.

All times are whole seconds; segment intervals are half-open [start_s, end_s).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable


class QuestionKind(str, Enum):
    ORIGINAL = "original"
    EXTRA = "extra"
    GENERIC_SELF_ASSESSMENT = "generic_self_assessment"


GENERIC_PROMPT = "How well did you understand this video?"

# Fixed 5-level self-rating scale for generic questions. An answer selecting
# level L (1-based) scores (L - 1) / 4; the correct flags are placeholders.
GENERIC_SELF_RATING_LEVELS = (
    "Not at all",
    "Slightly",
    "Moderately",
    "Well",
    "Very well",
)


class ConversionError(ValueError):
    """Raised when an in-video-quiz course cannot be converted."""


@dataclass(frozen=True)
class Option:
    text: str
    correct: bool


@dataclass(frozen=True)
class Video:
    video_id: str
    title: str
    duration_s: int
    unit_id: str
    order_index: int
    url: str | None = None


@dataclass(frozen=True)
class Segment:
    segment_id: str
    video_id: str
    start_s: int
    end_s: int

    @property
    def length_s(self) -> int:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Question:
    question_id: str
    prompt: str
    options: tuple[Option, ...]
    segment_refs: tuple[str, ...]
    kind: QuestionKind
    order_index: int

    @property
    def focus_segment_id(self) -> str:
        """The segment this question is paired with for display and ordering."""
        return self.segment_refs[-1]


@dataclass(frozen=True)
class InVideoQuiz:
    """One quiz embedded at a fixed position inside a video."""

    video_id: str
    position_s: int
    question_id: str
    prompt: str
    options: tuple[Option, ...]
    kind: QuestionKind = QuestionKind.ORIGINAL


@dataclass(frozen=True)
class InVideoQuizCourse:
    course_id: str
    videos: tuple[Video, ...]
    quizzes: tuple[InVideoQuiz, ...]


@dataclass(frozen=True)
class CourseManifest:
    course_id: str
    units: tuple[str, ...]
    videos: tuple[Video, ...]
    segments: tuple[Segment, ...]
    questions: tuple[Question, ...]

    # Lookup caches; derived, excluded from equality.
    _video_index: dict[str, Video] = field(
        default_factory=dict, compare=False, repr=False
    )
    _segment_index: dict[str, Segment] = field(
        default_factory=dict, compare=False, repr=False
    )
    _question_index: dict[str, Question] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        self._video_index.update({v.video_id: v for v in self.videos})
        self._segment_index.update({s.segment_id: s for s in self.segments})
        self._question_index.update({q.question_id: q for q in self.questions})

    def video(self, video_id: str) -> Video:
        return self._video_index[video_id]

    def segment(self, segment_id: str) -> Segment:
        return self._segment_index[segment_id]

    def question(self, question_id: str) -> Question:
        return self._question_index[question_id]

    def has_video(self, video_id: str) -> bool:
        return video_id in self._video_index

    def has_question(self, question_id: str) -> bool:
        return question_id in self._question_index

    def questions_in_order(self) -> list[Question]:
        return sorted(self.questions, key=lambda q: q.order_index)

    def focus_question_of(self, segment_id: str) -> Question:
        for q in self.questions:
            if q.segment_refs and q.segment_refs[-1] == segment_id:
                return q
        raise KeyError(segment_id)

    def unit_of_question(self, question_id: str) -> str:
        """Unit a question belongs to, via its focus segment's video."""
        q = self.question(question_id)
        seg = self.segment(q.focus_segment_id)
        return self.video(seg.video_id).unit_id


def segment_id_for(video_id: str, start_s: int) -> str:
    return f"{video_id}:seg:{start_s}"


def generic_question_id_for(video_id: str, start_s: int) -> str:
    return f"{video_id}:selfcheck:{start_s}"


def generic_options() -> tuple[Option, ...]:
    return tuple(Option(text, False) for text in GENERIC_SELF_RATING_LEVELS)


def _check_source_course(src: InVideoQuizCourse) -> None:
    video_ids = set()
    for v in src.videos:
        if v.duration_s <= 0:
            raise ConversionError(f"video {v.video_id}: duration_s must be positive")
        if v.video_id in video_ids:
            raise ConversionError(f"video {v.video_id}: duplicate video id")
        video_ids.add(v.video_id)
    seen_order: set[tuple[str, int]] = set()
    for v in src.videos:
        key = (v.unit_id, v.order_index)
        if key in seen_order:
            raise ConversionError(
                f"video {v.video_id}: duplicate order_index {v.order_index} "
                f"in unit {v.unit_id}"
            )
        seen_order.add(key)
    durations = {v.video_id: v.duration_s for v in src.videos}
    positions: dict[str, set[int]] = {}
    for quiz in src.quizzes:
        if quiz.video_id not in durations:
            raise ConversionError(
                f"quiz {quiz.question_id}: unknown video {quiz.video_id}"
            )
        if not 0 < quiz.position_s <= durations[quiz.video_id]:
            raise ConversionError(
                f"video {quiz.video_id}: quiz position {quiz.position_s} "
                f"outside (0, {durations[quiz.video_id]}]"
            )
        per_video = positions.setdefault(quiz.video_id, set())
        if quiz.position_s in per_video:
            raise ConversionError(
                f"video {quiz.video_id}: duplicate quiz position {quiz.position_s}"
            )
        per_video.add(quiz.position_s)


def convert_course(src: InVideoQuizCourse) -> CourseManifest:
    """Split each video at its quiz positions and pair segments with questions.

    A quiz at position p becomes the focus question of the segment ending at
    p. A trailing stretch with no quiz (and every quiz-less video) gets a
    generic self-rating question. Question order follows video order, then
    segment start. Duplicate quiz positions and positions outside the video
    are rejected.
    """
    _check_source_course(src)

    units: list[str] = []
    for v in src.videos:
        if v.unit_id not in units:
            units.append(v.unit_id)
    unit_rank = {u: i for i, u in enumerate(units)}
    ordered_videos = sorted(src.videos, key=lambda v: (unit_rank[v.unit_id], v.order_index))

    quizzes_by_video: dict[str, dict[int, InVideoQuiz]] = {}
    for quiz in src.quizzes:
        quizzes_by_video.setdefault(quiz.video_id, {})[quiz.position_s] = quiz

    segments: list[Segment] = []
    questions: list[Question] = []
    order = 0
    for video in ordered_videos:
        by_position = quizzes_by_video.get(video.video_id, {})
        boundaries = [0] + sorted(by_position)
        if boundaries[-1] != video.duration_s:
            boundaries.append(video.duration_s)
        for start, end in zip(boundaries, boundaries[1:]):
            seg = Segment(segment_id_for(video.video_id, start), video.video_id, start, end)
            segments.append(seg)
            quiz = by_position.get(end)
            if quiz is not None:
                question = Question(
                    question_id=quiz.question_id,
                    prompt=quiz.prompt,
                    options=quiz.options,
                    segment_refs=(seg.segment_id,),
                    kind=quiz.kind,
                    order_index=order,
                )
            else:
                question = Question(
                    question_id=generic_question_id_for(video.video_id, start),
                    prompt=GENERIC_PROMPT,
                    options=generic_options(),
                    segment_refs=(seg.segment_id,),
                    kind=QuestionKind.GENERIC_SELF_ASSESSMENT,
                    order_index=order,
                )
            questions.append(question)
            order += 1

    return CourseManifest(
        course_id=src.course_id,
        units=tuple(units),
        videos=tuple(ordered_videos),
        segments=tuple(segments),
        questions=tuple(questions),
    )


def validate_manifest(m: CourseManifest) -> list[str]:
    """Check every manifest invariant; returns one message per violation.

    An empty list means the manifest is valid. Messages name the offending
    entity and the rule it breaks.
    """
    violations: list[str] = []

    video_ids: set[str] = set()
    for v in m.videos:
        if v.video_id in video_ids:
            violations.append(f"video {v.video_id}: duplicate video id")
        video_ids.add(v.video_id)
        if v.duration_s <= 0:
            violations.append(f"video {v.video_id}: duration_s must be positive")
        if v.unit_id not in m.units:
            violations.append(f"video {v.video_id}: unit {v.unit_id} not in course units")
    order_keys: dict[tuple[str, int], str] = {}
    for v in m.videos:
        key = (v.unit_id, v.order_index)
        if key in order_keys:
            violations.append(
                f"unit {v.unit_id}: videos {order_keys[key]} and {v.video_id} "
                f"share order_index {v.order_index}"
            )
        else:
            order_keys[key] = v.video_id

    segment_ids: set[str] = set()
    by_video: dict[str, list[Segment]] = {}
    for s in m.segments:
        if s.segment_id in segment_ids:
            violations.append(f"segment {s.segment_id}: duplicate segment id")
        segment_ids.add(s.segment_id)
        if s.video_id not in video_ids:
            violations.append(f"segment {s.segment_id}: unknown video {s.video_id}")
            continue
        video = m.video(s.video_id)
        if not (0 <= s.start_s < s.end_s <= video.duration_s):
            violations.append(
                f"segment {s.segment_id}: bounds [{s.start_s},{s.end_s}) invalid "
                f"for video of duration {video.duration_s}"
            )
            continue
        by_video.setdefault(s.video_id, []).append(s)

    for video in m.videos:
        segs = sorted(by_video.get(video.video_id, []), key=lambda s: (s.start_s, s.end_s))
        if not segs:
            violations.append(f"video {video.video_id}: no segments cover it")
            continue
        if segs[0].start_s != 0:
            violations.append(
                f"video {video.video_id}: gap [0,{segs[0].start_s}) before "
                f"segment {segs[0].segment_id}"
            )
        for prev, cur in zip(segs, segs[1:]):
            if cur.start_s < prev.end_s:
                violations.append(
                    f"segments {prev.segment_id} and {cur.segment_id} overlap "
                    f"on video {video.video_id}"
                )
            elif cur.start_s > prev.end_s:
                violations.append(
                    f"video {video.video_id}: gap [{prev.end_s},{cur.start_s}) "
                    f"between segments {prev.segment_id} and {cur.segment_id}"
                )
        if segs[-1].end_s != video.duration_s:
            violations.append(
                f"video {video.video_id}: gap [{segs[-1].end_s},{video.duration_s}) "
                f"after segment {segs[-1].segment_id}"
            )

    question_ids: set[str] = set()
    order_indices: dict[int, str] = {}
    focus_of: dict[str, list[str]] = {}
    for q in m.questions:
        if q.question_id in question_ids:
            violations.append(f"question {q.question_id}: duplicate question id")
        question_ids.add(q.question_id)
        if q.order_index in order_indices:
            violations.append(
                f"questions {order_indices[q.order_index]} and {q.question_id} "
                f"share order_index {q.order_index}"
            )
        else:
            order_indices[q.order_index] = q.question_id
        if not q.segment_refs:
            violations.append(f"question {q.question_id}: segment_refs is empty")
        else:
            for ref in q.segment_refs:
                if ref not in segment_ids:
                    violations.append(
                        f"question {q.question_id}: unknown segment {ref}"
                    )
            if q.segment_refs[-1] in segment_ids:
                focus_of.setdefault(q.segment_refs[-1], []).append(q.question_id)
        if q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT:
            if tuple(o.text for o in q.options) != GENERIC_SELF_RATING_LEVELS:
                violations.append(
                    f"question {q.question_id}: generic question must use the "
                    f"fixed self-rating option set"
                )
        elif not q.options:
            violations.append(f"question {q.question_id}: options list is empty")

    for s in m.segments:
        holders = focus_of.get(s.segment_id, [])
        if not holders:
            violations.append(f"segment {s.segment_id}: no focus question")
        elif len(holders) > 1:
            violations.append(
                f"segment {s.segment_id}: multiple focus questions "
                f"({', '.join(sorted(holders))})"
            )

    return violations


# --- serialization ---------------------------------------------------------
#
# Both course documents are JSON, one object per file. Field names mirror the
# dataclasses; see docs/FILE_FORMATS.md for the frozen schema.


def _option_to_dict(o: Option) -> dict[str, Any]:
    return {"text": o.text, "correct": o.correct}


def _video_to_dict(v: Video) -> dict[str, Any]:
    d: dict[str, Any] = {
        "video_id": v.video_id,
        "title": v.title,
        "duration_s": v.duration_s,
        "unit_id": v.unit_id,
        "order_index": v.order_index,
    }
    if v.url is not None:
        d["url"] = v.url
    return d


def _video_from_dict(d: dict[str, Any]) -> Video:
    return Video(
        video_id=d["video_id"],
        title=d["title"],
        duration_s=int(d["duration_s"]),
        unit_id=d["unit_id"],
        order_index=int(d["order_index"]),
        url=d.get("url"),
    )


def _options_from(items: Iterable[dict[str, Any]]) -> tuple[Option, ...]:
    return tuple(Option(text=o["text"], correct=bool(o["correct"])) for o in items)


def manifest_to_dict(m: CourseManifest) -> dict[str, Any]:
    return {
        "course_id": m.course_id,
        "units": list(m.units),
        "videos": [_video_to_dict(v) for v in m.videos],
        "segments": [
            {
                "segment_id": s.segment_id,
                "video_id": s.video_id,
                "start_s": s.start_s,
                "end_s": s.end_s,
            }
            for s in m.segments
        ],
        "questions": [
            {
                "question_id": q.question_id,
                "prompt": q.prompt,
                "options": [_option_to_dict(o) for o in q.options],
                "segment_refs": list(q.segment_refs),
                "kind": q.kind.value,
                "order_index": q.order_index,
            }
            for q in m.questions
        ],
    }


def manifest_from_dict(d: dict[str, Any]) -> CourseManifest:
    return CourseManifest(
        course_id=d["course_id"],
        units=tuple(d["units"]),
        videos=tuple(_video_from_dict(v) for v in d["videos"]),
        segments=tuple(
            Segment(
                segment_id=s["segment_id"],
                video_id=s["video_id"],
                start_s=int(s["start_s"]),
                end_s=int(s["end_s"]),
            )
            for s in d["segments"]
        ),
        questions=tuple(
            Question(
                question_id=q["question_id"],
                prompt=q["prompt"],
                options=_options_from(q["options"]),
                segment_refs=tuple(q["segment_refs"]),
                kind=QuestionKind(q["kind"]),
                order_index=int(q["order_index"]),
            )
            for q in d["questions"]
        ),
    )


def invideo_course_to_dict(c: InVideoQuizCourse) -> dict[str, Any]:
    return {
        "course_id": c.course_id,
        "videos": [_video_to_dict(v) for v in c.videos],
        "quizzes": [
            {
                "video_id": q.video_id,
                "position_s": q.position_s,
                "question_id": q.question_id,
                "prompt": q.prompt,
                "options": [_option_to_dict(o) for o in q.options],
                "kind": q.kind.value,
            }
            for q in c.quizzes
        ],
    }


def invideo_course_from_dict(d: dict[str, Any]) -> InVideoQuizCourse:
    return InVideoQuizCourse(
        course_id=d["course_id"],
        videos=tuple(_video_from_dict(v) for v in d["videos"]),
        quizzes=tuple(
            InVideoQuiz(
                video_id=q["video_id"],
                position_s=int(q["position_s"]),
                question_id=q["question_id"],
                prompt=q["prompt"],
                options=_options_from(q["options"]),
                kind=QuestionKind(q.get("kind", "original")),
            )
            for q in d["quizzes"]
        ),
    )


def dumps_canonical(m: CourseManifest) -> str:
    """Canonical JSON form: identical manifests serialize byte-for-byte."""
    return json.dumps(manifest_to_dict(m), sort_keys=True, indent=2) + "\n"


def load_manifest(path: str | Path) -> CourseManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return manifest_from_dict(json.load(fh))


def save_manifest(m: CourseManifest, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(m), encoding="utf-8")


def load_invideo_course(path: str | Path) -> InVideoQuizCourse:
    with open(path, "r", encoding="utf-8") as fh:
        return invideo_course_from_dict(json.load(fh))


def save_invideo_course(c: InVideoQuizCourse, path: str | Path) -> None:
    text = json.dumps(invideo_course_to_dict(c), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")
