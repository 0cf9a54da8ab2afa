// Shapes of the study-service API responses (see docs/HTTP_API.md).

export interface SegmentView {
  segment_id: string;
  video_id: string;
  video_title: string;
  video_url: string | null;
  video_duration_s: number;
  start_s: number;
  end_s: number;
}

export interface QuestionView {
  question_id: string;
  prompt: string;
  kind: string;
  options: string[];
  segments: SegmentView[];
}

export type StudyMode = "initial_pass" | "review";

export interface SessionView {
  session_id: string;
  user_id: string;
  course_id: string;
  mode: StudyMode;
  created_at_ms: number;
  initial_pass_complete: boolean;
  question: QuestionView;
}

export interface AnswerResult {
  score: number;
  correct: boolean;
  advanced: boolean;
  session: SessionView;
}

export type RegionTag = "seen_prior_parts" | "seen_current_part" | "unseen" | "relevant";

export interface Region {
  start_s: number;
  end_s: number;
  tag: RegionTag;
}

export interface WatchResponse {
  video_id: string;
  regions: Region[];
}

export type WatchAction = "play" | "pause" | "seek" | "heartbeat";

export interface TimelineEntry {
  question_id: string;
  prompt: string;
  answered_correctly: boolean;
  latest_score: number;
  segment_refs: string[];
  resume_position_s: Record<string, number>;
  answered_at_ms: number;
}

export interface MasteryView {
  question_id: string;
  performance: number;
  watched: number;
  recency: number;
  combined: number;
  computed_at_ms: number;
}

export interface ReviewEntry {
  question_id: string;
  prompt: string;
  mastery: MasteryView;
}
