"""Directory-level log analytics: from session files to seeking statistics.

Walks a directory of session log files, rebuilds per-user seek streams,
groups them into chains per (user, video), and aggregates quiz-relative
statistics per video and course-wide. Also derives, per user and video,
how many sessions opened the video and whether any single open finished it
(for the rewatch statistic).
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .course import (
    CourseManifest,
    InVideoQuizCourse,
    QuestionKind,
    invideo_course_from_dict,
    manifest_from_dict,
)
from .events import EventKind, InteractionEvent, read_log_file
from .seekchains import (
    MERGE_THRESHOLD_MS,
    QUIZ_WINDOW_S,
    FigureData,
    RewatchTally,
    SeekChain,
    SeekStats,
    SeekTally,
    VideoOpenSummary,
    build_chains,
    emit_figure_data,
    rewatch_tally,
    stats_from_tallies,
    tally_chains,
)

DEFAULT_FINISHED_FRACTION = 0.9


@dataclass(frozen=True)
class VideoSpec:
    video_id: str
    duration_s: int
    quiz_positions: tuple[int, ...]


@dataclass
class VideoReport:
    spec: VideoSpec
    chains: list[SeekChain]
    tally: SeekTally
    rewatch: RewatchTally
    stats: SeekStats
    opens_by_user: dict[str, VideoOpenSummary]
    figure_data: FigureData


@dataclass
class CourseAnalysis:
    videos: dict[str, VideoReport]
    overall_tally: SeekTally
    overall_rewatch: RewatchTally
    overall: SeekStats
    config: dict[str, Any] = field(default_factory=dict)


def video_specs_from_invideo_course(course: InVideoQuizCourse) -> dict[str, VideoSpec]:
    positions: dict[str, list[int]] = {v.video_id: [] for v in course.videos}
    for quiz in course.quizzes:
        positions[quiz.video_id].append(quiz.position_s)
    return {
        v.video_id: VideoSpec(v.video_id, v.duration_s, tuple(sorted(positions[v.video_id])))
        for v in course.videos
    }


def video_specs_from_manifest(manifest: CourseManifest) -> dict[str, VideoSpec]:
    """Quiz positions reconstructed from a converted manifest: the end of
    every segment whose focus question came from an embedded quiz."""
    positions: dict[str, list[int]] = {v.video_id: [] for v in manifest.videos}
    for q in manifest.questions:
        if q.kind is QuestionKind.ORIGINAL:
            seg = manifest.segment(q.focus_segment_id)
            positions[seg.video_id].append(seg.end_s)
    return {
        v.video_id: VideoSpec(v.video_id, v.duration_s, tuple(sorted(positions[v.video_id])))
        for v in manifest.videos
    }


def load_video_specs(path: str | Path) -> dict[str, VideoSpec]:
    """Accepts either course document; detected by its fields."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "quizzes" in doc:
        return video_specs_from_invideo_course(invideo_course_from_dict(doc))
    if "segments" in doc:
        return video_specs_from_manifest(manifest_from_dict(doc))
    raise ValueError(f"{path}: neither an in-video course nor a course manifest")


def load_log_directory(root: str | Path) -> list[list[InteractionEvent]]:
    """Events per session file, in stable path order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"log directory {root} does not exist")
    sessions = []
    for path in sorted(root.rglob("*.jsonl")):
        sessions.append(read_log_file(path))
    return sessions


def _session_video_seen_seconds(
    events: Iterable[InteractionEvent], video_id: str, duration_s: int
) -> int:
    """Seconds of one video seen within one session, from its play/pause/seek
    records. Malformed spans are skipped rather than rejected: analytics
    should survive a truncated file."""
    seen: set[int] = set()
    open_pos: int | None = None

    def clamp(x: int) -> int:
        return max(0, min(x, duration_s))

    for ev in events:
        if ev.payload.get("video_id") != video_id:
            continue
        if ev.kind is EventKind.VIDEO_PLAY:
            pos = clamp(int(ev.payload["position_s"]))
            if open_pos is not None and pos > open_pos:
                seen.update(range(open_pos, pos))
            open_pos = pos
        elif ev.kind is EventKind.VIDEO_PAUSE:
            pos = clamp(int(ev.payload["position_s"]))
            if open_pos is not None and pos > open_pos:
                seen.update(range(open_pos, pos))
            open_pos = None
        elif ev.kind in (EventKind.VIDEO_SEEK, EventKind.SKIP_UNSEEN_CLICK):
            if open_pos is not None:
                open_pos = clamp(int(ev.payload["to_s"]))
    return len(seen)


def summarize_opens(
    sessions: Sequence[Sequence[InteractionEvent]],
    spec: VideoSpec,
    finished_fraction: float = DEFAULT_FINISHED_FRACTION,
) -> dict[str, VideoOpenSummary]:
    """Per user: sessions that played the video, and whether one finished it."""
    opens: dict[str, int] = {}
    finished: dict[str, bool] = {}
    for events in sessions:
        users_playing = {
            ev.user_id
            for ev in events
            if ev.kind is EventKind.VIDEO_PLAY and ev.payload.get("video_id") == spec.video_id
        }
        for user_id in users_playing:
            opens[user_id] = opens.get(user_id, 0) + 1
            seen = _session_video_seen_seconds(
                [ev for ev in events if ev.user_id == user_id], spec.video_id, spec.duration_s
            )
            if seen >= finished_fraction * spec.duration_s:
                finished[user_id] = True
    return {
        user_id: VideoOpenSummary(opens=n, finished=finished.get(user_id, False))
        for user_id, n in opens.items()
    }


def chains_per_user(
    sessions: Sequence[Sequence[InteractionEvent]],
    video_id: str,
    merge_threshold_ms: int = MERGE_THRESHOLD_MS,
) -> tuple[list[SeekChain], int]:
    """Seek chains on one video, pooled over every user in the logs.

    A user's seeks are ordered by event id across their sessions; only the
    gaps between that user's consecutive seeks on this video decide merging.
    Returns the kept chains plus the count of zero-displacement chains that
    were dropped (they have no direction and are reported separately).
    """
    per_user: dict[str, list[InteractionEvent]] = {}
    for events in sessions:
        for ev in events:
            if ev.kind is EventKind.VIDEO_SEEK and ev.payload.get("video_id") == video_id:
                per_user.setdefault(ev.user_id, []).append(ev)
    chains: list[SeekChain] = []
    dropped = 0
    for user_id in sorted(per_user):
        stream = sorted(per_user[user_id], key=lambda ev: ev.event_id)
        grouped = build_chains(stream, merge_threshold_ms, drop_zero_displacement=False)
        for chain in grouped:
            if chain.source_s == chain.dest_s:
                dropped += 1
            else:
                chains.append(chain)
    return chains, dropped


def analyze_sessions(
    sessions: Sequence[Sequence[InteractionEvent]],
    specs: Mapping[str, VideoSpec],
    merge_threshold_ms: int = MERGE_THRESHOLD_MS,
    quiz_window_s: int = QUIZ_WINDOW_S,
    finished_fraction: float = DEFAULT_FINISHED_FRACTION,
) -> CourseAnalysis:
    videos: dict[str, VideoReport] = {}
    overall_tally = SeekTally()
    overall_rewatch = RewatchTally()
    for video_id in sorted(specs):
        spec = specs[video_id]
        chains, dropped = chains_per_user(sessions, video_id, merge_threshold_ms)
        tally = tally_chains(
            chains,
            spec.quiz_positions,
            spec.duration_s,
            quiz_window_s,
            zero_displacement_dropped=dropped,
        )
        opens = summarize_opens(sessions, spec, finished_fraction)
        rewatch = rewatch_tally(opens)
        videos[video_id] = VideoReport(
            spec=spec,
            chains=chains,
            tally=tally,
            rewatch=rewatch,
            stats=stats_from_tallies(tally, rewatch),
            opens_by_user=opens,
            figure_data=emit_figure_data(chains, spec.quiz_positions, spec.duration_s),
        )
        overall_tally = overall_tally.merge(tally)
        overall_rewatch = overall_rewatch.merge(rewatch)
    return CourseAnalysis(
        videos=videos,
        overall_tally=overall_tally,
        overall_rewatch=overall_rewatch,
        overall=stats_from_tallies(overall_tally, overall_rewatch),
        config={
            "merge_threshold_ms": merge_threshold_ms,
            "quiz_window_s": quiz_window_s,
            "finished_fraction": finished_fraction,
        },
    )


def analyze_directory(
    log_dir: str | Path,
    specs: Mapping[str, VideoSpec],
    merge_threshold_ms: int = MERGE_THRESHOLD_MS,
    quiz_window_s: int = QUIZ_WINDOW_S,
    finished_fraction: float = DEFAULT_FINISHED_FRACTION,
) -> CourseAnalysis:
    sessions = load_log_directory(log_dir)
    return analyze_sessions(
        sessions, specs, merge_threshold_ms, quiz_window_s, finished_fraction
    )


# --- report output -----------------------------------------------------------


def _stats_to_dict(stats: SeekStats) -> dict[str, Any]:
    return {
        "total_chains": stats.total_chains,
        "backward_from_quiz_fraction": stats.backward_from_quiz_fraction,
        "forward_to_quiz_window_fraction": stats.forward_to_quiz_window_fraction,
        "chains_not_crossing_quiz_fraction": stats.chains_not_crossing_quiz_fraction,
        "per_quiz_backward_rate_ratio": stats.per_quiz_backward_rate_ratio,
        "forward_cross_rate_ratio": stats.forward_cross_rate_ratio,
        "rewatch_fraction": stats.rewatch_fraction,
    }


def analysis_to_dict(analysis: CourseAnalysis) -> dict[str, Any]:
    return {
        "config": analysis.config,
        "overall": {
            **_stats_to_dict(analysis.overall),
            "zero_displacement_dropped": analysis.overall_tally.zero_displacement_dropped,
            "finished_users": analysis.overall_rewatch.finished_users,
            "rewatch_users": analysis.overall_rewatch.rewatch_users,
        },
        "videos": {
            video_id: {
                "duration_s": report.spec.duration_s,
                "quiz_positions": list(report.spec.quiz_positions),
                "chain_count": len(report.chains),
                "backward_chains": report.tally.backward_chains,
                "forward_chains": report.tally.forward_chains,
                "zero_displacement_dropped": report.tally.zero_displacement_dropped,
                "finished_users": report.rewatch.finished_users,
                "rewatch_users": report.rewatch.rewatch_users,
                **_stats_to_dict(report.stats),
            }
            for video_id, report in analysis.videos.items()
        },
    }


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def write_figure_tables(fd: FigureData, out_dir: str | Path) -> list[Path]:
    """Write the delimited tables for one video; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    scatter_path = out_dir / "scatter.csv"
    with open(scatter_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_s", "dest_s"])
        writer.writerows(fd.scatter)
    written.append(scatter_path)

    for name, counts in (
        ("seek_destinations.csv", fd.destination_counts),
        ("skip_coverage.csv", fd.skip_counts),
    ):
        path = out_dir / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["second", "count"])
            writer.writerows(enumerate(counts))
        written.append(path)

    quiz_path = out_dir / "quiz_positions.csv"
    with open(quiz_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position_s"])
        writer.writerows([q] for q in fd.quiz_positions)
    written.append(quiz_path)
    return written


def write_report(analysis: CourseAnalysis, out_dir: str | Path, figures: bool = True) -> Path:
    """Write the stats report plus per-video tables (and rendered figures
    unless disabled). Returns the report path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "seek_stats.json"
    report_path.write_text(
        json.dumps(analysis_to_dict(analysis), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    for video_id, report in analysis.videos.items():
        video_dir = out_dir / "videos" / _slug(video_id)
        write_figure_tables(report.figure_data, video_dir)
        if figures:
            from .figures import render_video_figures

            render_video_figures(report.figure_data, video_id, video_dir)
    return report_path
