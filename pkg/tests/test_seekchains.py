from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from studyloop.events import EventKind, InteractionEvent
from studyloop.seekchains import (
    SeekChain,
    VideoOpenSummary,
    build_chains,
    classify_chain,
    compute_stats,
    emit_figure_data,
    quizzes_between,
    tally_chains,
)


def seek_event(event_id: int, at_ms: int, from_s: int, to_s: int, user: str = "u") -> InteractionEvent:
    return InteractionEvent(
        event_id=event_id,
        user_id=user,
        at_ms=at_ms,
        kind=EventKind.VIDEO_SEEK,
        payload={"video_id": "v1", "from_s": from_s, "to_s": to_s},
    )


def chain(source: int, dest: int, user: str = "u") -> SeekChain:
    return SeekChain(user_id=user, video_id="v1", source_s=source, dest_s=dest, started_at_ms=0)


def oracle_group(events, threshold_ms):
    """Brute-force grouping: find boundary indices, then slice."""
    if not events:
        return []
    boundaries = [0] + [
        i
        for i in range(1, len(events))
        if events[i].at_ms - events[i - 1].at_ms >= threshold_ms
    ] + [len(events)]
    groups = [events[a:b] for a, b in zip(boundaries, boundaries[1:])]
    return [
        (g[0].payload["from_s"], g[-1].payload["to_s"], g[0].at_ms) for g in groups
    ]


class TestBuildChains:
    def test_gap_under_threshold_merges(self):
        events = [seek_event(1, 0, 30, 100), seek_event(2, 3000, 100, 250)]
        (c,) = build_chains(events)
        assert (c.source_s, c.dest_s) == (30, 250)
        assert c.started_at_ms == 0

    def test_gap_at_or_over_threshold_splits(self):
        events = [seek_event(1, 0, 30, 100), seek_event(2, 6000, 100, 250)]
        chains = build_chains(events)
        assert [(c.source_s, c.dest_s) for c in chains] == [(30, 100), (100, 250)]

    def test_exact_threshold_gap_starts_new_chain(self):
        events = [seek_event(1, 0, 30, 100), seek_event(2, 5000, 100, 250)]
        assert len(build_chains(events)) == 2
        events = [seek_event(1, 0, 30, 100), seek_event(2, 4999, 100, 250)]
        assert len(build_chains(events)) == 1

    def test_zero_net_displacement_dropped(self):
        events = [seek_event(1, 0, 30, 100), seek_event(2, 2000, 100, 30)]
        assert build_chains(events) == []
        kept = build_chains(
            [seek_event(1, 0, 30, 100), seek_event(2, 2000, 100, 30)],
            drop_zero_displacement=False,
        )
        assert [(c.source_s, c.dest_s) for c in kept] == [(30, 30)]

    def test_unsorted_input_rejected(self):
        events = [seek_event(1, 5000, 30, 100), seek_event(2, 0, 100, 250)]
        with pytest.raises(ValueError, match="ordered"):
            build_chains(events)

    def test_non_seek_event_rejected(self):
        bad = InteractionEvent(1, "u", 0, EventKind.VIDEO_PLAY, {"video_id": "v1", "position_s": 0})
        with pytest.raises(ValueError, match="video_seek"):
            build_chains([bad])

    def test_mixed_videos_rejected(self):
        a = seek_event(1, 0, 10, 20)
        b = InteractionEvent(
            2, "u", 1000, EventKind.VIDEO_SEEK,
            {"video_id": "v2", "from_s": 0, "to_s": 5},
        )
        with pytest.raises(ValueError, match="single user and video"):
            build_chains([a, b])


seek_streams = st.lists(
    st.tuples(st.integers(0, 12000), st.integers(0, 500), st.integers(0, 500)),
    max_size=40,
)


class TestChainProperties:
    @given(seek_streams)
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_force_oracle(self, rows):
        at = 0
        events = []
        for i, (gap, from_s, to_s) in enumerate(rows):
            at += gap
            events.append(seek_event(i + 1, at, from_s, to_s))
        chains = build_chains(events, drop_zero_displacement=False)
        assert [(c.source_s, c.dest_s, c.started_at_ms) for c in chains] == oracle_group(
            events, 5000
        )

    @given(seek_streams)
    @settings(max_examples=100, deadline=None)
    def test_every_event_in_exactly_one_chain(self, rows):
        at = 0
        events = []
        for i, (gap, from_s, to_s) in enumerate(rows):
            at += gap
            events.append(seek_event(i + 1, at, from_s, to_s))
        chains = build_chains(events, drop_zero_displacement=False)
        groups = oracle_group(events, 5000)
        assert len(chains) == len(groups)
        assert len(chains) <= len(events)


class TestClassifyChain:
    def test_backward_from_quiz(self):
        cls = classify_chain(chain(300, 200), [300])
        assert cls.starts_at_quiz
        assert not cls.ends_in_quiz_window
        assert not cls.crosses_quiz

    def test_source_within_window_after_quiz(self):
        assert classify_chain(chain(310, 200), [300]).starts_at_quiz
        assert not classify_chain(chain(311, 200), [300]).starts_at_quiz

    def test_forward_into_quiz_window(self):
        cls = classify_chain(chain(100, 295), [300])
        assert cls.ends_in_quiz_window
        assert not cls.crosses_quiz

    def test_window_is_ten_seconds_before_quiz(self):
        assert classify_chain(chain(100, 290), [300]).ends_in_quiz_window
        assert classify_chain(chain(100, 300), [300]).ends_in_quiz_window
        assert not classify_chain(chain(100, 289), [300]).ends_in_quiz_window

    def test_backward_chain_never_ends_in_window(self):
        assert not classify_chain(chain(400, 295), [300]).ends_in_quiz_window

    def test_forward_across_quiz(self):
        cls = classify_chain(chain(100, 400), [300])
        assert cls.crosses_quiz
        assert cls.crossed_quizzes == (300,)

    def test_crossing_is_strict(self):
        assert not classify_chain(chain(300, 400), [300]).crosses_quiz
        assert not classify_chain(chain(100, 300), [300]).crosses_quiz

    def test_plain_chain(self):
        cls = classify_chain(chain(50, 80), [300])
        assert cls.plain

    @given(
        st.integers(0, 400),
        st.integers(0, 400),
        st.lists(st.integers(0, 400), unique=True, max_size=5).map(sorted),
        st.integers(-1000, 1000),
    )
    @settings(max_examples=200, deadline=None)
    def test_translation_invariance(self, source, dest, quizzes, offset):
        if source == dest:
            dest += 1
        base = classify_chain(chain(source, dest), quizzes)
        shifted = classify_chain(
            chain(source + offset, dest + offset), [q + offset for q in quizzes]
        )
        assert (base.starts_at_quiz, base.ends_in_quiz_window, base.crosses_quiz) == (
            shifted.starts_at_quiz,
            shifted.ends_in_quiz_window,
            shifted.crosses_quiz,
        )
        assert shifted.crossed_quizzes == tuple(q + offset for q in base.crossed_quizzes)


NO_OPENS: dict[str, VideoOpenSummary] = {}


class TestComputeStats:
    def test_planted_backward_fraction_recovered_exactly(self):
        quiz = 300
        chains = []
        for n in range(4):  # backward, starting at the quiz
            chains.append(chain(quiz, 200 - n))
        for n in range(6):  # backward, elsewhere
            chains.append(chain(150 + n, 100))
        stats = compute_stats(chains, [quiz], 1000, NO_OPENS)
        assert stats.backward_from_quiz_fraction == 0.40

    def test_per_quiz_ratio_hand_example(self):
        stats = compute_stats([chain(50, 20)], [50], 100, NO_OPENS)
        assert stats.per_quiz_backward_rate_ratio == pytest.approx(100.0)

    def test_no_quizzes_leaves_quiz_fields_undefined(self):
        stats = compute_stats([chain(10, 60), chain(80, 30)], [], 100, NO_OPENS)
        assert stats.total_chains == 2
        assert stats.per_quiz_backward_rate_ratio is None
        assert stats.forward_cross_rate_ratio is None
        assert stats.backward_from_quiz_fraction is not None

    def test_no_backward_chains_leaves_fraction_undefined(self):
        stats = compute_stats([chain(10, 60)], [50], 100, NO_OPENS)
        assert stats.backward_from_quiz_fraction is None

    def test_rewatch_fraction(self):
        opens = {
            "a": VideoOpenSummary(opens=2, finished=True),
            "b": VideoOpenSummary(opens=1, finished=True),
            "c": VideoOpenSummary(opens=3, finished=False),
        }
        stats = compute_stats([], [], 100, opens)
        assert stats.rewatch_fraction == 0.5

    def test_no_finishers_leaves_rewatch_undefined(self):
        opens = {"c": VideoOpenSummary(opens=3, finished=False)}
        stats = compute_stats([], [], 100, opens)
        assert stats.rewatch_fraction is None

    def test_forward_cross_ratio_definition(self):
        # one forward chain 100 -> 400 crossing the quiz at 300:
        # (1 crossing / 1 quiz) / (300 skipped seconds / 600 s) = 2.0
        stats = compute_stats([chain(100, 400)], [300], 600, NO_OPENS)
        assert stats.forward_cross_rate_ratio == pytest.approx(2.0)

    def test_tallies_merge_like_pooled_computation(self):
        chains_a = [chain(300, 100), chain(10, 60)]
        chains_b = [chain(305, 50), chain(20, 290)]
        t_a = tally_chains(chains_a, [300], 600)
        t_b = tally_chains(chains_b, [300], 600)
        pooled = tally_chains(chains_a + chains_b, [300], 600)
        merged = t_a.merge(t_b)
        assert merged == type(merged)(
            **{**pooled.__dict__, "duration_s": 1200, "quiz_count": 2}
        )


class TestEmitFigureData:
    def test_single_chain(self):
        fd = emit_figure_data([chain(30, 250)], [], duration_s=300)
        assert fd.scatter == ((30, 250),)
        assert fd.destination_counts[250] == 1
        assert sum(fd.destination_counts) == 1
        expected = [1 if 30 <= s < 250 else 0 for s in range(300)]
        assert list(fd.skip_counts) == expected

    def test_empty_chain_list(self):
        fd = emit_figure_data([], [100], duration_s=200)
        assert fd.scatter == ()
        assert set(fd.destination_counts) == {0}
        assert set(fd.skip_counts) == {0}
        assert fd.quiz_positions == (100,)

    def test_thousand_random_chains_match_recount(self):
        rng = random.Random(42)
        duration = 500
        chains = []
        for _ in range(1000):
            a = rng.randrange(duration)
            b = rng.randrange(duration)
            if a == b:
                b = (b + 1) % duration
            chains.append(chain(a, b))
        fd = emit_figure_data(chains, [], duration_s=duration)
        dest = [0] * duration
        skip = [0] * duration
        for c in chains:
            dest[c.dest_s] += 1
            if c.dest_s > c.source_s:
                for s in range(c.source_s, c.dest_s):
                    skip[s] += 1
        assert list(fd.destination_counts) == dest
        assert list(fd.skip_counts) == skip


class TestQuizzesBetween:
    def test_strictly_between(self):
        assert quizzes_between(100, 400, [100, 250, 400]) == (250,)
        assert quizzes_between(400, 100, [100, 250, 400]) == (250,)
