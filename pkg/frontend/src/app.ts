import { ApiError, StudyApi } from "./api";
import { paintBar, skipButtonState } from "./progressbar";
import { renderReview, renderTimeline } from "./timeline";
import type { Region, SegmentView, SessionView, TimelineEntry } from "./types";

const HEARTBEAT_SPAN_S = 5;

/**
 * Mirrors the service's watch-span protocol for one video: play opens a
 * span, heartbeats (at most 5 s each) and the final pause cover it, seeks
 * move its origin. Every report's region response flows to onRegions.
 */
export class WatchReporter {
  openAtS: number | null = null;

  constructor(
    private readonly api: StudyApi,
    private readonly sessionId: string,
    readonly videoId: string,
    private readonly onRegions: (regions: Region[]) => void,
  ) {}

  private async report(fromS: number, toS: number, action: "play" | "pause" | "seek" | "heartbeat") {
    const response = await this.api.reportWatch(this.sessionId, this.videoId, fromS, toS, action);
    this.onRegions(response.regions);
  }

  async play(positionS: number): Promise<void> {
    if (this.openAtS !== null) {
      return; // already playing; the next heartbeat covers the gap
    }
    await this.report(positionS, positionS, "play");
    this.openAtS = positionS;
  }

  /** Report progress up to the playhead; capped at 5 s per heartbeat. */
  async heartbeat(positionS: number): Promise<void> {
    if (this.openAtS === null || positionS <= this.openAtS) {
      return;
    }
    const toS = Math.min(positionS, this.openAtS + HEARTBEAT_SPAN_S);
    await this.report(this.openAtS, toS, "heartbeat");
    this.openAtS = toS;
  }

  async pause(positionS: number): Promise<void> {
    if (this.openAtS === null) {
      return;
    }
    const toS = Math.max(positionS, this.openAtS);
    await this.report(this.openAtS, toS, "pause");
    this.openAtS = null;
  }

  async seek(fromS: number, toS: number): Promise<void> {
    await this.report(fromS, toS, "seek");
    if (this.openAtS !== null) {
      this.openAtS = toS;
    }
  }

  /** The skip button moves the playhead server-side via its own log call. */
  noteSkip(toS: number): void {
    if (this.openAtS !== null) {
      this.openAtS = toS;
    }
  }
}

export interface StudyAppOptions {
  userId: string;
  courseId: string;
}

/**
 * The study screen: focus question on the left, its video on the right
 * with a region-painted progress bar, skip-to-unseen button, and the
 * timeline (plus review suggestions pinned on top once the initial pass
 * is done). Every displayed value comes from an API response.
 */
export class StudyApp {
  session: SessionView | null = null;
  regions: Region[] = [];
  skipTargetS: number | null = null;
  reporter: WatchReporter | null = null;

  private lastKnownS = 0;
  private suppressNextSeekReport = false;
  private retryAction: (() => Promise<void>) | null = null;

  readonly player: HTMLVideoElement;
  private readonly promptEl: HTMLElement;
  private readonly modeEl: HTMLElement;
  private readonly optionsEl: HTMLElement;
  private readonly feedbackEl: HTMLElement;
  private readonly videoTitleEl: HTMLElement;
  private readonly barEl: HTMLElement;
  private readonly skipButton: HTMLButtonElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly pauseOnFocusToggle: HTMLInputElement;
  private readonly reviewEl: HTMLElement;
  private readonly timelineEl: HTMLElement;
  private readonly errorEl: HTMLElement;
  private readonly errorMessageEl: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi,
    private readonly options: StudyAppOptions,
  ) {
    root.innerHTML = `
      <div id="error-banner" hidden>
        <span id="error-message"></span>
        <button id="retry-button" type="button">Retry</button>
      </div>
      <main class="study-view">
        <section id="question-panel">
          <span id="mode-badge"></span>
          <p id="prompt"></p>
          <form id="answer-form">
            <div id="options"></div>
            <button id="submit-answer" type="submit">Submit answer</button>
          </form>
          <p id="feedback"></p>
          <label id="pause-on-focus-label">
            <input type="checkbox" id="pause-on-focus" />
            pause video while answering
          </label>
        </section>
        <section id="video-panel">
          <h2 id="video-title"></h2>
          <video id="player"></video>
          <div id="progress-bar"></div>
          <button id="skip-button" type="button" hidden></button>
        </section>
      </main>
      <section id="review-panel"></section>
      <section id="timeline"></section>
    `;
    this.errorEl = this.el("#error-banner");
    this.errorMessageEl = this.el("#error-message");
    this.modeEl = this.el("#mode-badge");
    this.promptEl = this.el("#prompt");
    this.optionsEl = this.el("#options");
    this.feedbackEl = this.el("#feedback");
    this.videoTitleEl = this.el("#video-title");
    this.barEl = this.el("#progress-bar");
    this.skipButton = this.el<HTMLButtonElement>("#skip-button");
    this.submitButton = this.el<HTMLButtonElement>("#submit-answer");
    this.pauseOnFocusToggle = this.el<HTMLInputElement>("#pause-on-focus");
    this.reviewEl = this.el("#review-panel");
    this.timelineEl = this.el("#timeline");
    this.player = this.el<HTMLVideoElement>("#player");
    this.wire();
  }

  private el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector(selector);
    if (!found) {
      throw new Error(`missing element ${selector}`);
    }
    return found as T;
  }

  private wire(): void {
    this.el("#retry-button").addEventListener("click", () => {
      const action = this.retryAction;
      this.clearError();
      if (action) {
        void action();
      }
    });
    this.el("#answer-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitAnswer();
    });
    this.skipButton.addEventListener("click", () => void this.skipToUnseen());
    this.el("#question-panel").addEventListener("focusin", () => {
      if (this.pauseOnFocusToggle.checked && !this.player.paused) {
        this.player.pause();
      }
    });
    this.player.addEventListener("play", () => {
      void this.guard(async () => {
        await this.reporter?.play(Math.floor(this.player.currentTime));
        await this.refreshSkip();
      });
    });
    this.player.addEventListener("timeupdate", () => {
      const position = Math.floor(this.player.currentTime);
      const openAt = this.reporter?.openAtS ?? null;
      this.lastKnownS = position;
      if (openAt !== null && position - openAt >= HEARTBEAT_SPAN_S) {
        void this.guard(async () => {
          await this.reporter?.heartbeat(position);
          await this.refreshSkip();
        });
      }
    });
    this.player.addEventListener("pause", () => {
      void this.guard(async () => {
        await this.reporter?.pause(Math.floor(this.player.currentTime));
        this.updateSkipButton();
      });
    });
    this.player.addEventListener("seeked", () => {
      const toS = Math.floor(this.player.currentTime);
      const fromS = this.lastKnownS;
      this.lastKnownS = toS;
      if (this.suppressNextSeekReport) {
        this.suppressNextSeekReport = false;
        return;
      }
      void this.guard(async () => {
        await this.reporter?.seek(fromS, toS);
      });
    });
  }

  async start(): Promise<void> {
    await this.guard(async () => {
      this.applySession(await this.api.startSession(this.options.userId, this.options.courseId));
      await this.refreshRegions();
      await this.refreshHistory();
    }, () => this.start());
  }

  /** The segment paired with the current question: the last reference. */
  get focusSegment(): SegmentView | null {
    const segments = this.session?.question.segments ?? [];
    return segments.length ? segments[segments.length - 1] : null;
  }

  applySession(view: SessionView): void {
    this.session = view;
    this.modeEl.textContent = view.mode === "review" ? "reviewing" : "initial pass";
    this.promptEl.textContent = view.question.prompt;
    this.optionsEl.textContent = "";
    const doc = this.root.ownerDocument;
    view.question.options.forEach((text, index) => {
      const label = doc.createElement("label");
      label.className = "option";
      const box = doc.createElement("input");
      box.type = "checkbox";
      box.name = "option";
      box.dataset.index = String(index);
      label.appendChild(box);
      label.appendChild(doc.createTextNode(text));
      this.optionsEl.appendChild(label);
    });
    const segment = this.focusSegment;
    if (segment) {
      this.videoTitleEl.textContent = segment.video_title;
      if (segment.video_url && this.player.getAttribute("src") !== segment.video_url) {
        this.player.setAttribute("src", segment.video_url);
      }
      if (!this.reporter || this.reporter.videoId !== segment.video_id) {
        this.reporter = new WatchReporter(
          this.api,
          view.session_id,
          segment.video_id,
          (regions) => this.applyRegions(regions),
        );
      }
    }
  }

  applyRegions(regions: Region[]): void {
    this.regions = regions;
    const segment = this.focusSegment;
    if (segment) {
      paintBar(this.barEl, regions, segment.video_duration_s);
    }
    this.updateSkipButton();
  }

  async refreshRegions(): Promise<void> {
    const segment = this.focusSegment;
    if (!this.session || !segment) {
      return;
    }
    const response = await this.api.watchRegions(this.session.session_id, segment.video_id);
    this.applyRegions(response.regions);
  }

  async refreshHistory(): Promise<void> {
    if (!this.session) {
      return;
    }
    const timeline = await this.api.timeline(this.session.session_id);
    renderTimeline(this.timelineEl, timeline.entries, {
      onExpand: (entry) => void this.expandTimelineEntry(entry),
    });
    if (this.session.mode === "review") {
      const review = await this.api.review(this.session.session_id);
      renderReview(this.reviewEl, review.entries);
    } else {
      this.reviewEl.textContent = "";
    }
  }

  selectedVector(): boolean[] {
    const boxes = Array.from(
      this.optionsEl.querySelectorAll<HTMLInputElement>("input[type=checkbox]"),
    );
    return boxes.map((box) => box.checked);
  }

  async submitAnswer(): Promise<void> {
    if (!this.session) {
      return;
    }
    const questionId = this.session.question.question_id;
    await this.guard(async () => {
      try {
        const result = await this.api.submitAnswer(
          this.session!.session_id,
          questionId,
          this.selectedVector(),
        );
        this.feedbackEl.textContent = result.correct
          ? "Correct!"
          : `Score ${Math.round(result.score * 100)}% - try again`;
        this.applySession(result.session);
        await this.refreshRegions();
        await this.refreshHistory();
      } catch (error) {
        if (error instanceof ApiError && error.status === 409 && error.currentQuestionId) {
          // client fell out of sync: reload the authoritative session view
          this.applySession(await this.api.getSession(this.session!.session_id));
          this.feedbackEl.textContent = "The question moved on; showing the current one.";
          return;
        }
        throw error;
      }
    });
  }

  async expandTimelineEntry(entry: TimelineEntry): Promise<void> {
    if (!this.session) {
      return;
    }
    await this.guard(async () => {
      await this.api.logTimelineExpand(this.session!.session_id, entry.question_id);
      const resumeAt = Object.values(entry.resume_position_s)[0] ?? 0;
      this.suppressNextSeekReport = true;
      this.player.currentTime = resumeAt;
      this.lastKnownS = resumeAt;
      try {
        void this.player.play()?.catch(() => undefined);
      } catch {
        /* autoplay blocked; the learner can press play */
      }
    });
  }

  async refreshSkip(): Promise<void> {
    const segment = this.focusSegment;
    if (!this.session || !segment || this.reporter?.openAtS === null) {
      this.skipTargetS = null;
      this.updateSkipButton();
      return;
    }
    this.skipTargetS = await this.api.skipTarget(
      this.session.session_id,
      segment.video_id,
      Math.floor(this.player.currentTime),
    );
    this.updateSkipButton();
  }

  updateSkipButton(): void {
    const playing = this.reporter?.openAtS !== null && this.reporter !== null;
    const state = skipButtonState(
      this.regions,
      Math.floor(this.player.currentTime),
      playing,
      this.skipTargetS,
    );
    this.skipButton.hidden = !state.visible;
    if (state.visible && state.targetS !== null) {
      this.skipButton.textContent = `Skip to unseen (${state.targetS}s)`;
      this.skipButton.dataset.targetS = String(state.targetS);
    }
  }

  async skipToUnseen(): Promise<void> {
    const segment = this.focusSegment;
    const target = this.skipTargetS;
    if (!this.session || !segment || target === null) {
      return;
    }
    await this.guard(async () => {
      const fromS = Math.floor(this.player.currentTime);
      this.suppressNextSeekReport = true;
      this.player.currentTime = target;
      this.lastKnownS = target;
      this.reporter?.noteSkip(target);
      await this.api.logSkipClick(this.session!.session_id, segment.video_id, fromS, target);
      await this.refreshSkip();
    });
  }

  private async guard(action: () => Promise<void>, retry?: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (error) {
      this.retryAction = retry ?? action;
      this.errorMessageEl.textContent =
        error instanceof Error ? error.message : "The study service is unreachable.";
      this.errorEl.hidden = false;
    }
  }

  private clearError(): void {
    this.retryAction = null;
    this.errorEl.hidden = true;
    this.errorMessageEl.textContent = "";
  }
}

export function boot(root: HTMLElement, options: StudyAppOptions, baseUrl = ""): StudyApp {
  const app = new StudyApp(root, new StudyApi(baseUrl), options);
  void app.start();
  return app;
}
