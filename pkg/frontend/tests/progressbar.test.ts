import { describe, expect, it } from "vitest";

import {
  barSegments,
  inSeenRegion,
  paintBar,
  partitionProblems,
  skipButtonState,
} from "../src/progressbar";
import type { Region } from "../src/types";

const REGIONS: Region[] = [
  { start_s: 0, end_s: 30, tag: "seen_prior_parts" },
  { start_s: 30, end_s: 80, tag: "seen_current_part" },
  { start_s: 80, end_s: 300, tag: "unseen" },
  { start_s: 30, end_s: 150, tag: "relevant" },
];

describe("barSegments", () => {
  it("maps response intervals onto percentages without recomputation", () => {
    const segments = barSegments(REGIONS, 300);
    expect(segments.map((s) => [s.startS, s.endS, s.tag])).toEqual(
      REGIONS.map((r) => [r.start_s, r.end_s, r.tag]),
    );
    expect(segments[0].leftPct).toBe(0);
    expect(segments[0].widthPct).toBe(10);
    expect(segments[3].overlay).toBe(true);
  });

  it("non-overlay widths sum to the full bar", () => {
    const base = barSegments(REGIONS, 300).filter((s) => !s.overlay);
    const total = base.reduce((acc, s) => acc + s.widthPct, 0);
    expect(total).toBeCloseTo(100, 9);
  });
});

describe("partitionProblems", () => {
  it("accepts a clean partition with a relevant overlay", () => {
    expect(partitionProblems(REGIONS, 300)).toEqual([]);
  });

  it("reports gaps and overlaps", () => {
    const gappy: Region[] = [
      { start_s: 0, end_s: 30, tag: "unseen" },
      { start_s: 40, end_s: 300, tag: "unseen" },
    ];
    expect(partitionProblems(gappy, 300).join(" ")).toContain("gap");
    const overlapping: Region[] = [
      { start_s: 0, end_s: 50, tag: "unseen" },
      { start_s: 40, end_s: 300, tag: "unseen" },
    ];
    expect(partitionProblems(overlapping, 300).join(" ")).toContain("overlap");
  });

  it("reports short bars", () => {
    const short: Region[] = [{ start_s: 0, end_s: 200, tag: "unseen" }];
    expect(partitionProblems(short, 300).join(" ")).toContain("ends at 200");
  });
});

describe("paintBar", () => {
  it("renders exactly the API's regions, in order, with their tags", () => {
    const container = document.createElement("div");
    paintBar(container, REGIONS, 300);
    const painted = Array.from(container.children).map((child) => {
      const el = child as HTMLElement;
      return [Number(el.dataset.startS), Number(el.dataset.endS), el.dataset.tag];
    });
    expect(painted).toEqual(REGIONS.map((r) => [r.start_s, r.end_s, r.tag]));
  });

  it("repaints from scratch on each update", () => {
    const container = document.createElement("div");
    paintBar(container, REGIONS, 300);
    paintBar(container, [{ start_s: 0, end_s: 300, tag: "unseen" }], 300);
    expect(container.children).toHaveLength(1);
  });
});

describe("skipButtonState", () => {
  it("shows the button with the server's target while playing in seen video", () => {
    const state = skipButtonState(REGIONS, 10, true, 80);
    expect(state).toEqual({ visible: true, targetS: 80 });
  });

  it("hides when playing inside unseen video", () => {
    expect(skipButtonState(REGIONS, 200, true, 80).visible).toBe(false);
  });

  it("hides when the server has no unseen remainder", () => {
    expect(skipButtonState(REGIONS, 10, true, null).visible).toBe(false);
  });

  it("hides while paused", () => {
    expect(skipButtonState(REGIONS, 10, false, 80).visible).toBe(false);
  });

  it("the relevant overlay alone does not count as seen", () => {
    expect(inSeenRegion(REGIONS, 100)).toBe(false);
    expect(inSeenRegion(REGIONS, 40)).toBe(true);
  });
});
