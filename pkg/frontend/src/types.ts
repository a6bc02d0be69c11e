/** Payload shapes of the review service JSON API. */

export const VERDICT_CLASSES = [
  "clear_mislabel",
  "likely_mislabel",
  "ambiguous",
  "likely_ok",
  "clear_ok",
] as const;

export type VerdictClass = (typeof VERDICT_CLASSES)[number];

/** One audited node as stored in the report. */
export interface AuditRecord {
  node_id: number;
  given_label: number;
  mislabel_score: number;
  flagged: boolean;
  suggested_label?: number;
}

/** Report record with the reviewer's effective verdict class, if any. */
export interface RankedRecord extends AuditRecord {
  verdict: VerdictClass | null;
}

/** GET /api/report?offset&limit */
export interface ReportPage {
  schema: number;
  dataset: string;
  total: number;
  offset: number;
  limit: number;
  num_classes: number;
  records: RankedRecord[];
}

/** One neighbor in a hop ring of GET /api/node/{id}. */
export interface NeighborInfo {
  node_id: number;
  label: number;
  split: string;
  p_row?: number[];
  mislabel_score?: number;
}

export interface HopRing {
  hop: number;
  nodes: NeighborInfo[];
}

/** A verdict as persisted in the log. */
export interface StoredVerdict {
  node_id: number;
  verdict: VerdictClass;
  corrected_label?: number;
  reviewer: string;
  timestamp: string;
}

/** GET /api/node/{id} */
export interface NodeDetail {
  record: AuditRecord;
  neighbors: HopRing[];
  verdict: StoredVerdict | null;
  p_row?: number[];
}

/** POST /api/verdict body; the service fills the timestamp. */
export interface VerdictSubmission {
  node_id: number;
  verdict: VerdictClass;
  corrected_label?: number;
  reviewer: string;
}

/** GET /api/progress */
export interface Progress {
  counts: Record<VerdictClass, number>;
  reviewed: number;
  total: number;
  flagged: number;
}

/** GET /api/export */
export interface ExportPayload {
  label_csv: string;
  split_csv: string;
}
