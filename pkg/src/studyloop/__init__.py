"""studyloop: quiz-driven lecture study engine and seek-chain log analytics."""

from .course import (
    CourseManifest,
    InVideoQuiz,
    InVideoQuizCourse,
    Option,
    Question,
    QuestionKind,
    Segment,
    Video,
    convert_course,
    dumps_canonical,
    validate_manifest,
)
from .coverage import (
    Region,
    WatchCoverage,
    coverage_regions,
    empty_coverage,
    mark_watched,
    next_unseen,
    watched_fraction,
)
from .events import (
    EventKind,
    EventLog,
    InteractionEvent,
    event_counts,
    replay,
)
from .scheduler import (
    AttemptRecord,
    MasteryScore,
    SchedulerConfig,
    StudyState,
    grade_free_response,
    mastery,
    next_question,
    performance_score,
    recency_score,
    review_list,
    score_attempt,
)
from .seekchains import (
    SeekChain,
    SeekStats,
    build_chains,
    classify_chain,
    compute_stats,
    emit_figure_data,
)
from .service import StudyService

__version__ = "0.1.0"

__all__ = [
    "AttemptRecord",
    "CourseManifest",
    "EventKind",
    "EventLog",
    "InVideoQuiz",
    "InVideoQuizCourse",
    "InteractionEvent",
    "MasteryScore",
    "Option",
    "Question",
    "QuestionKind",
    "Region",
    "SchedulerConfig",
    "SeekChain",
    "SeekStats",
    "Segment",
    "StudyService",
    "StudyState",
    "Video",
    "WatchCoverage",
    "build_chains",
    "classify_chain",
    "compute_stats",
    "convert_course",
    "coverage_regions",
    "dumps_canonical",
    "emit_figure_data",
    "empty_coverage",
    "event_counts",
    "grade_free_response",
    "mark_watched",
    "mastery",
    "next_question",
    "next_unseen",
    "performance_score",
    "recency_score",
    "replay",
    "review_list",
    "score_attempt",
    "validate_manifest",
    "watched_fraction",
]
