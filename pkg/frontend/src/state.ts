/** Pure client-side rules: verdict gating, queue cursor math, progress bars. */

import type { NeighborInfo, Progress, VerdictClass, VerdictSubmission } from "./types.js";
import { VERDICT_CLASSES } from "./types.js";

/** The two verdict classes whose submission requires a corrected label. */
export const MISLABEL_VERDICTS: readonly VerdictClass[] = [
  "clear_mislabel",
  "likely_mislabel",
];

export function needsCorrection(verdict: VerdictClass): boolean {
  return MISLABEL_VERDICTS.includes(verdict);
}

/** What the reviewer has picked so far for the current node. */
export interface Selection {
  verdict: VerdictClass | null;
  correctedLabel: number | null;
}

export type Gate = { ok: true } | { ok: false; reason: string };

/** Client-side submission rule: a verdict must be chosen, and the two
 * mislabel verdicts must carry a corrected label. */
export function gateSubmission(sel: Selection): Gate {
  if (sel.verdict === null) {
    return { ok: false, reason: "choose a verdict first" };
  }
  if (needsCorrection(sel.verdict) && sel.correctedLabel === null) {
    return { ok: false, reason: "mislabel verdicts need a corrected label" };
  }
  return { ok: true };
}

/** Assemble the POST body; the corrected label is sent only for the two
 * mislabel verdicts (export ignores it elsewhere, so never send it). */
export function buildSubmission(
  nodeId: number,
  sel: Selection,
  reviewer: string,
): VerdictSubmission {
  const gate = gateSubmission(sel);
  if (!gate.ok) {
    throw new Error(gate.reason);
  }
  const verdict = sel.verdict as VerdictClass;
  const body: VerdictSubmission = { node_id: nodeId, verdict, reviewer };
  if (needsCorrection(verdict) && sel.correctedLabel !== null) {
    body.corrected_label = sel.correctedLabel;
  }
  return body;
}

/** Clamp a queue index into [0, total). */
export function clampIndex(index: number, total: number): number {
  if (total <= 0) {
    return 0;
  }
  return Math.min(Math.max(index, 0), total - 1);
}

/** Offset of the page (of size `limit`) that contains `index`. */
export function pageStart(index: number, limit: number): number {
  return Math.floor(index / limit) * limit;
}

export interface ProgressSegment {
  verdict: VerdictClass;
  count: number;
  /** share of ALL records, so the stacked bar fills as review proceeds */
  fraction: number;
}

/** Stacked-bar segments for the five verdict classes, in canonical order. */
export function progressSegments(progress: Progress): ProgressSegment[] {
  const total = progress.total;
  return VERDICT_CLASSES.map((verdict) => {
    const count = progress.counts[verdict] ?? 0;
    return { verdict, count, fraction: total > 0 ? count / total : 0 };
  });
}

/** Per-label neighbor counts for one hop ring, indexable 0..numClasses-1. */
export function labelHistogram(nodes: NeighborInfo[], numClasses: number): number[] {
  const counts = new Array<number>(numClasses).fill(0);
  for (const node of nodes) {
    if (node.label >= 0 && node.label < numClasses) {
      counts[node.label] += 1;
    }
  }
  return counts;
}
