/** Mirrors of the review service's JSON payloads. Field names match the wire. */

export type Verdict = "true_positive" | "false_positive" | "unsure";

export const VERDICTS: readonly Verdict[] = ["true_positive", "false_positive", "unsure"];

export interface HealthInfo {
  status: string;
  documents: number;
  rules: number;
  matches: number;
  orphaned_labels: number;
}

export interface MatchItem {
  match_id: string;
  doc_id: string;
  field: string;
  rule_id: string;
  char_span: [number, number];
  matched_text: string;
  expected: string;
  context: string;
  /** offsets of matched_text inside context */
  highlight: [number, number];
  journal: string;
  verdict: Verdict | null;
  status: Verdict | "pending";
  label_count: number;
}

export interface MatchPage {
  items: MatchItem[];
  page: number;
  page_size: number;
  total: number;
  total_pages: number;
}

export interface LabelAck {
  label: {
    match_id: string;
    verdict: Verdict;
    reviewer: string;
    note: string;
    at: string;
    seq: number;
  };
  history: number;
  idempotent: boolean;
}

export interface PhraseRule {
  id: string;
  pattern: string;
  expected: string;
  status: "confirmed" | "candidate";
  note: string;
}

export interface RescanJob {
  job_id: string;
  state: "running" | "done" | "failed";
  started: string;
  finished: string | null;
  matches_before: number;
  matches_after: number | null;
  error?: string;
}

/** One ECDF band: rows are [x, lower, F(x), upper], envelopes pre-clamped. */
export interface BandJson {
  n: number;
  alpha: number;
  epsilon: number;
  steps: [number, number, number, number][];
}

export interface HistogramSet {
  n: number;
  counts: number[];
  percentages: number[];
}

export type HistogramsJson = Record<string, HistogramSet>;

export interface DurationRow {
  period: string;
  n: number;
  min?: number;
  max?: number;
  avg?: number;
  stddev?: number;
  median?: number;
}

export interface BlockEntry {
  anchor: [string, string, string];
  size: number;
  member_ids: string[];
}

export interface BlocksJson {
  min_size: number;
  excluded_missing_revision: number;
  blocks: BlockEntry[];
}
