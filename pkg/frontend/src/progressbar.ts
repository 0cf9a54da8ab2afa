import type { Region, RegionTag } from "./types";

export interface BarSegment {
  startS: number;
  endS: number;
  tag: RegionTag;
  leftPct: number;
  widthPct: number;
  /** The relevant span renders as an overlay band above the base layer. */
  overlay: boolean;
}

/**
 * Map the API's region list onto percentage-positioned bar segments.
 * The geometry comes straight from the response; nothing is recomputed.
 */
export function barSegments(regions: Region[], durationS: number): BarSegment[] {
  return regions.map((region) => ({
    startS: region.start_s,
    endS: region.end_s,
    tag: region.tag,
    leftPct: (region.start_s / durationS) * 100,
    widthPct: ((region.end_s - region.start_s) / durationS) * 100,
    overlay: region.tag === "relevant",
  }));
}

/**
 * Check that non-overlay regions tile [0, durationS) with no gap or
 * overlap. Returns human-readable problems; an empty list means a clean
 * partition.
 */
export function partitionProblems(regions: Region[], durationS: number): string[] {
  const base = regions
    .filter((region) => region.tag !== "relevant")
    .slice()
    .sort((a, b) => a.start_s - b.start_s);
  const problems: string[] = [];
  if (base.length === 0) {
    return [`no base regions for a ${durationS}s video`];
  }
  if (base[0].start_s !== 0) {
    problems.push(`bar starts at ${base[0].start_s}, not 0`);
  }
  for (let i = 1; i < base.length; i += 1) {
    const prev = base[i - 1];
    const cur = base[i];
    if (cur.start_s > prev.end_s) {
      problems.push(`gap [${prev.end_s},${cur.start_s})`);
    } else if (cur.start_s < prev.end_s) {
      problems.push(`overlap [${cur.start_s},${prev.end_s})`);
    }
  }
  const last = base[base.length - 1];
  if (last.end_s !== durationS) {
    problems.push(`bar ends at ${last.end_s}, not ${durationS}`);
  }
  return problems;
}

/** Repaint a progress-bar container from the latest region response. */
export function paintBar(container: HTMLElement, regions: Region[], durationS: number): void {
  container.textContent = "";
  for (const segment of barSegments(regions, durationS)) {
    const div = container.ownerDocument.createElement("div");
    div.className = `bar-region ${segment.tag}${segment.overlay ? " overlay" : ""}`;
    div.style.left = `${segment.leftPct}%`;
    div.style.width = `${segment.widthPct}%`;
    div.dataset.startS = String(segment.startS);
    div.dataset.endS = String(segment.endS);
    div.dataset.tag = segment.tag;
    container.appendChild(div);
  }
}

/** True when the playhead sits inside an already-seen (non-overlay) region. */
export function inSeenRegion(regions: Region[], positionS: number): boolean {
  return regions.some(
    (region) =>
      (region.tag === "seen_prior_parts" || region.tag === "seen_current_part") &&
      region.start_s <= positionS &&
      positionS < region.end_s,
  );
}

export interface SkipButtonState {
  visible: boolean;
  targetS: number | null;
}

/**
 * The skip-to-unseen button shows only while playing inside an
 * already-seen region with somewhere left to go; its target is exactly
 * the server's answer.
 */
export function skipButtonState(
  regions: Region[],
  positionS: number,
  playing: boolean,
  targetS: number | null,
): SkipButtonState {
  const visible = playing && targetS !== null && inSeenRegion(regions, positionS);
  return { visible, targetS: visible ? targetS : null };
}
