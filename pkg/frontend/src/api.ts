import type {
  AnswerResult,
  ReviewEntry,
  SessionView,
  TimelineEntry,
  QuestionView,
  WatchAction,
  WatchResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: Record<string, unknown>,
  ) {
    super(typeof body.detail === "string" ? body.detail : `request failed (${status})`);
  }

  /** The server's authoritative current question on a stale-answer conflict. */
  get currentQuestionId(): string | null {
    const id = this.body.current_question_id;
    return typeof id === "string" ? id : null;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client over the study-service HTTP API. The UI displays only
 * values taken from these responses; it computes no mastery, coverage, or
 * scheduling of its own.
 */
export class StudyApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (response.status === 204) {
      return undefined as T;
    }
    const payload = (await response.json().catch(() => ({}))) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(response.status, payload);
    }
    return payload as T;
  }

  startSession(userId: string, courseId: string): Promise<SessionView> {
    return this.request("POST", "/sessions", { user_id: userId, course_id: courseId });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  currentQuestion(sessionId: string): Promise<QuestionView> {
    return this.request("GET", `/sessions/${sessionId}/question`);
  }

  submitAnswer(sessionId: string, questionId: string, selected: boolean[]): Promise<AnswerResult> {
    return this.request("POST", `/sessions/${sessionId}/answers`, {
      question_id: questionId,
      selected,
    });
  }

  reportWatch(
    sessionId: string,
    videoId: string,
    fromS: number,
    toS: number,
    action: WatchAction,
  ): Promise<WatchResponse> {
    return this.request("POST", `/sessions/${sessionId}/watch`, {
      video_id: videoId,
      from_s: fromS,
      to_s: toS,
      action,
    });
  }

  watchRegions(sessionId: string, videoId: string): Promise<WatchResponse> {
    return this.request("GET", `/sessions/${sessionId}/watch/${videoId}`);
  }

  timeline(sessionId: string): Promise<{ entries: TimelineEntry[] }> {
    return this.request("GET", `/sessions/${sessionId}/timeline`);
  }

  review(sessionId: string): Promise<{ entries: ReviewEntry[] }> {
    return this.request("GET", `/sessions/${sessionId}/review`);
  }

  skipTarget(sessionId: string, videoId: string, positionS: number): Promise<number | null> {
    return this.request<{ target_s: number | null }>(
      "GET",
      `/sessions/${sessionId}/skip-target?video_id=${encodeURIComponent(videoId)}&position_s=${positionS}`,
    ).then((body) => body.target_s);
  }

  logSkipClick(sessionId: string, videoId: string, fromS: number, toS: number): Promise<void> {
    return this.request("POST", `/sessions/${sessionId}/skip-clicks`, {
      video_id: videoId,
      from_s: fromS,
      to_s: toS,
    });
  }

  logTimelineExpand(sessionId: string, questionId: string): Promise<void> {
    return this.request("POST", `/sessions/${sessionId}/timeline-expansions`, {
      question_id: questionId,
    });
  }
}
