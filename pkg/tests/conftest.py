from __future__ import annotations

import pytest

from studyloop.course import (
    InVideoQuiz,
    InVideoQuizCourse,
    Option,
    Video,
    convert_course,
)


def checkbox_options(key: str) -> tuple[Option, ...]:
    """Options from a compact key string: 'x' checked, '.' unchecked."""
    return tuple(
        Option(text=f"choice {i + 1}", correct=ch == "x") for i, ch in enumerate(key)
    )


def build_invideo_course(
    course_id: str = "course-1",
    videos: tuple[tuple[str, int], ...] = (("v1", 600),),
    quizzes: tuple[tuple[str, int], ...] = (("v1", 200), ("v1", 450)),
    option_key: str = "xx..",
) -> InVideoQuizCourse:
    """A compact in-video course: videos as (id, duration), quizzes as
    (video_id, position). Every quiz gets the same 4-option checkbox key."""
    vids = tuple(
        Video(video_id=vid, title=f"Lecture {i + 1}", duration_s=dur, unit_id="unit-1", order_index=i)
        for i, (vid, dur) in enumerate(videos)
    )
    qs = tuple(
        InVideoQuiz(
            video_id=vid,
            position_s=pos,
            question_id=f"{vid}-quiz-{pos}",
            prompt=f"Quiz at {pos}s of {vid}?",
            options=checkbox_options(option_key),
        )
        for vid, pos in quizzes
    )
    return InVideoQuizCourse(course_id=course_id, videos=vids, quizzes=qs)


@pytest.fixture
def course600():
    """One 600 s video with quizzes at 200 s and 450 s, converted."""
    return convert_course(build_invideo_course())
