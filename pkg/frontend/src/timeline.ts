import type { ReviewEntry, TimelineEntry } from "./types";

export interface TimelineHandlers {
  /** Fired when a miniature is clicked to enlarge and resume its video. */
  onExpand: (entry: TimelineEntry) => void;
}

function formatScore(score: number): string {
  return `${Math.round(score * 100)}%`;
}

/**
 * Render the scrollable history of answered questions, newest first, in
 * exactly the order the API returned. Each entry shows the question, how
 * its latest attempt went, and a paused miniature that resumes playback
 * when clicked.
 */
export function renderTimeline(
  container: HTMLElement,
  entries: TimelineEntry[],
  handlers: TimelineHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (entries.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "timeline-empty";
    empty.textContent = "Nothing answered yet - the questions you finish will pile up here.";
    container.appendChild(empty);
    return;
  }
  for (const entry of entries) {
    const item = doc.createElement("article");
    item.className = "timeline-entry";
    item.dataset.questionId = entry.question_id;

    const prompt = doc.createElement("p");
    prompt.className = "timeline-prompt";
    prompt.textContent = entry.prompt;
    item.appendChild(prompt);

    const verdict = doc.createElement("span");
    verdict.className = `timeline-verdict ${entry.answered_correctly ? "correct" : "incorrect"}`;
    verdict.textContent = entry.answered_correctly
      ? "answered correctly"
      : `latest score ${formatScore(entry.latest_score)}`;
    item.appendChild(verdict);

    const mini = doc.createElement("button");
    mini.type = "button";
    mini.className = "timeline-miniature";
    const resumeAt = Object.values(entry.resume_position_s)[0] ?? 0;
    mini.dataset.resumeS = String(resumeAt);
    mini.textContent = `resume at ${resumeAt}s`;
    mini.addEventListener("click", () => handlers.onExpand(entry));
    item.appendChild(mini);

    container.appendChild(item);
  }
}

/**
 * Render review suggestions pinned above the timeline (review mode only),
 * in the API's order with its mastery numbers verbatim.
 */
export function renderReview(container: HTMLElement, entries: ReviewEntry[]): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  for (const entry of entries) {
    const item = doc.createElement("article");
    item.className = "review-entry";
    item.dataset.questionId = entry.question_id;

    const prompt = doc.createElement("p");
    prompt.textContent = entry.prompt;
    item.appendChild(prompt);

    const factors = doc.createElement("dl");
    factors.className = "review-factors";
    const pairs: Array<[string, number]> = [
      ["mastery", entry.mastery.combined],
      ["answers", entry.mastery.performance],
      ["watched", entry.mastery.watched],
      ["recency", entry.mastery.recency],
    ];
    for (const [label, value] of pairs) {
      const dt = doc.createElement("dt");
      dt.textContent = label;
      const dd = doc.createElement("dd");
      dd.dataset.factor = label;
      dd.textContent = value.toFixed(3);
      factors.appendChild(dt);
      factors.appendChild(dd);
    }
    item.appendChild(factors);
    container.appendChild(item);
  }
}
