from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from studyloop.course import (
    ConversionError,
    CourseManifest,
    Question,
    QuestionKind,
    Segment,
    convert_course,
    dumps_canonical,
    generic_options,
    invideo_course_from_dict,
    invideo_course_to_dict,
    manifest_from_dict,
    manifest_to_dict,
    validate_manifest,
)

from conftest import build_invideo_course, checkbox_options


class TestConvertCourse:
    def test_splits_at_quiz_positions(self, course600):
        assert [(s.start_s, s.end_s) for s in course600.segments] == [
            (0, 200),
            (200, 450),
            (450, 600),
        ]
        q1, q2, q3 = course600.questions_in_order()
        assert q1.question_id == "v1-quiz-200"
        assert q1.segment_refs == (course600.segments[0].segment_id,)
        assert q2.question_id == "v1-quiz-450"
        assert q2.segment_refs == (course600.segments[1].segment_id,)
        assert q3.kind is QuestionKind.GENERIC_SELF_ASSESSMENT
        assert q3.segment_refs == (course600.segments[2].segment_id,)

    def test_quizless_video_gets_single_generic_segment(self):
        src = build_invideo_course(videos=(("v1", 300),), quizzes=())
        manifest = convert_course(src)
        assert [(s.start_s, s.end_s) for s in manifest.segments] == [(0, 300)]
        (q,) = manifest.questions
        assert q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT
        assert q.options == generic_options()

    def test_quiz_at_end_covers_whole_video_without_generic(self):
        src = build_invideo_course(videos=(("v1", 300),), quizzes=(("v1", 300),))
        manifest = convert_course(src)
        assert [(s.start_s, s.end_s) for s in manifest.segments] == [(0, 300)]
        (q,) = manifest.questions
        assert q.kind is QuestionKind.ORIGINAL
        assert q.question_id == "v1-quiz-300"

    def test_duplicate_quiz_position_rejected_naming_video(self):
        src = build_invideo_course(quizzes=(("v1", 200), ("v1", 200)))
        with pytest.raises(ConversionError, match="v1"):
            convert_course(src)

    def test_position_beyond_duration_rejected(self):
        src = build_invideo_course(videos=(("v1", 300),), quizzes=(("v1", 301),))
        with pytest.raises(ConversionError, match="outside"):
            convert_course(src)

    def test_position_zero_rejected(self):
        src = build_invideo_course(videos=(("v1", 300),), quizzes=(("v1", 0),))
        with pytest.raises(ConversionError):
            convert_course(src)

    def test_question_order_follows_video_then_segment_order(self):
        src = build_invideo_course(
            videos=(("v1", 100), ("v2", 100)),
            quizzes=(("v2", 50), ("v1", 40)),
        )
        manifest = convert_course(src)
        ordered = manifest.questions_in_order()
        segments = [manifest.segment(q.focus_segment_id) for q in ordered]
        assert [(s.video_id, s.start_s) for s in segments] == [
            ("v1", 0),
            ("v1", 40),
            ("v2", 0),
            ("v2", 50),
        ]


class TestValidateManifest:
    def test_converted_manifest_is_valid(self, course600):
        assert validate_manifest(course600) == []

    def test_overlapping_segments_reported_naming_both(self, course600):
        video = course600.videos[0]
        seg_a = Segment("segA", video.video_id, 0, 100)
        seg_b = Segment("segB", video.video_id, 90, 200)
        manifest = CourseManifest(
            course_id="c",
            units=(video.unit_id,),
            videos=(video,),
            segments=(seg_a, seg_b),
            questions=(
                Question("qa", "a?", checkbox_options("x."), ("segA",), QuestionKind.ORIGINAL, 0),
                Question("qb", "b?", checkbox_options("x."), ("segB",), QuestionKind.ORIGINAL, 1),
            ),
        )
        violations = validate_manifest(manifest)
        assert any("segA" in v and "segB" in v and "overlap" in v for v in violations)

    def test_empty_segment_refs_reported_naming_question(self, course600):
        bad = Question("q-bad", "bad?", checkbox_options("x."), (), QuestionKind.EXTRA, 99)
        manifest = CourseManifest(
            course_id=course600.course_id,
            units=course600.units,
            videos=course600.videos,
            segments=course600.segments,
            questions=course600.questions + (bad,),
        )
        violations = validate_manifest(manifest)
        assert any("q-bad" in v and "segment_refs" in v for v in violations)

    def test_segment_without_focus_question_reported(self, course600):
        manifest = CourseManifest(
            course_id=course600.course_id,
            units=course600.units,
            videos=course600.videos,
            segments=course600.segments,
            questions=course600.questions[:-1],
        )
        violations = validate_manifest(manifest)
        missing = course600.segments[-1].segment_id
        assert any(missing in v and "no focus question" in v for v in violations)

    def test_multi_segment_question_is_focus_of_last_ref_only(self, course600):
        seg_ids = [s.segment_id for s in course600.segments]
        questions = list(course600.questions)
        q2 = questions[1]
        questions[1] = Question(
            q2.question_id, q2.prompt, q2.options,
            (seg_ids[0], seg_ids[1]), q2.kind, q2.order_index,
        )
        manifest = CourseManifest(
            course_id=course600.course_id,
            units=course600.units,
            videos=course600.videos,
            segments=course600.segments,
            questions=tuple(questions),
        )
        assert validate_manifest(manifest) == []

    def test_generic_question_with_wrong_options_reported(self, course600):
        questions = list(course600.questions)
        generic = questions[-1]
        questions[-1] = Question(
            generic.question_id, generic.prompt, checkbox_options("x...."),
            generic.segment_refs, generic.kind, generic.order_index,
        )
        manifest = CourseManifest(
            course_id=course600.course_id,
            units=course600.units,
            videos=course600.videos,
            segments=course600.segments,
            questions=tuple(questions),
        )
        violations = validate_manifest(manifest)
        assert any(generic.question_id in v and "self-rating" in v for v in violations)


def random_placements(min_videos: int = 1, max_videos: int = 4):
    """Strategy: (duration, sorted unique quiz positions) per video."""

    @st.composite
    def placements(draw):
        n = draw(st.integers(min_videos, max_videos))
        videos = []
        for i in range(n):
            duration = draw(st.integers(5, 400))
            positions = draw(
                st.lists(st.integers(1, duration), unique=True, max_size=6)
            )
            videos.append((duration, tuple(sorted(positions))))
        return videos

    return placements()


def course_from_placements(videos) -> "InVideoQuizCourse":
    vid_specs = tuple((f"v{i}", dur) for i, (dur, _) in enumerate(videos))
    quiz_specs = tuple(
        (f"v{i}", pos) for i, (_, positions) in enumerate(videos) for pos in positions
    )
    return build_invideo_course(videos=vid_specs, quizzes=quiz_specs)


class TestConversionProperties:
    @given(random_placements())
    @settings(max_examples=100, deadline=None)
    def test_converted_manifest_always_valid(self, videos):
        manifest = convert_course(course_from_placements(videos))
        assert validate_manifest(manifest) == []

    @given(random_placements())
    @settings(max_examples=100, deadline=None)
    def test_segments_cover_each_second_exactly_once(self, videos):
        manifest = convert_course(course_from_placements(videos))
        for video in manifest.videos:
            counts = [0] * video.duration_s
            for seg in manifest.segments:
                if seg.video_id == video.video_id:
                    for s in range(seg.start_s, seg.end_s):
                        counts[s] += 1
            assert counts == [1] * video.duration_s

    @given(random_placements())
    @settings(max_examples=50, deadline=None)
    def test_conversion_deterministic_byte_for_byte(self, videos):
        a = convert_course(course_from_placements(videos))
        b = convert_course(course_from_placements(videos))
        assert dumps_canonical(a) == dumps_canonical(b)

    @given(random_placements())
    @settings(max_examples=100, deadline=None)
    def test_generic_question_count(self, videos):
        manifest = convert_course(course_from_placements(videos))
        generics = sum(
            1 for q in manifest.questions if q.kind is QuestionKind.GENERIC_SELF_ASSESSMENT
        )
        expected = sum(
            1 for dur, positions in videos if not positions or max(positions) != dur
        )
        assert generics == expected


class TestSerialization:
    def test_manifest_round_trip(self, course600):
        assert manifest_from_dict(manifest_to_dict(course600)) == course600

    def test_invideo_round_trip(self):
        src = build_invideo_course(videos=(("v1", 300), ("v2", 120)), quizzes=(("v1", 60),))
        assert invideo_course_from_dict(invideo_course_to_dict(src)) == src
