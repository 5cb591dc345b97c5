/**
 * Wire types for the review service JSON API, plus the display state the
 * client layers on top of them.
 */

export type Confidence = "qualified" | "weak" | "unmatched";
export type Method = "levenshtein" | "embedding" | "classifier" | "none";

export interface MatchResult {
  source_column: string;
  matched_entry_id: string | null;
  predicted_path: string[];
  score: number;
  method: Method;
  confidence: Confidence;
  alternates: [string, number][];
}

export interface DecisionRecord {
  source_column: string;
  dataset_id: string;
  decided_entry_id: string;
  decided_path: string[];
  decision: "accepted" | "overridden";
  engine_suggestion: string | null;
  timestamp: number;
}

export interface ReviewItem {
  item_id: string;
  run_id: string;
  status: "pending" | "accepted" | "overridden";
  result: MatchResult;
  decided: DecisionRecord | null;
}

export interface Run {
  run_id: string;
  items: ReviewItem[];
}

export interface SchemaEntry {
  id: string;
  name: string;
  verbose_name: string | null;
  business_terms: string[];
  description: string | null;
  glossary_terms: string[];
  dictionary_entry: string | null;
  path: string[];
}

export interface StandardSchema {
  name: string;
  normalized: boolean;
  entries: SchemaEntry[];
}

export interface RetrainResponse {
  version: number;
  n_records: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  field?: string;
}

export type Decision = { action: "accept" } | { action: "override"; entry_id: string };

/** A pending row plus display state the server does not track. */
export interface UiReviewItem {
  item: ReviewItem;
  expanded: boolean;
  /* While true the row's buttons are disabled; guards double submits. */
  inFlight: boolean;
  /* Current text of the row's override picker. */
  search: string;
}

export interface Toast {
  kind: "info" | "error" | "conflict";
  text: string;
}

export interface Banner {
  kind: "error" | "guidance" | "version";
  text: string;
  retryable: boolean;
}

export interface AppState {
  schema: StandardSchema | null;
  /* Pending rows across all known runs, ascending by score. */
  items: UiReviewItem[];
  runIds: string[];
  version: number | null;
  banner: Banner | null;
  toasts: Toast[];
  submitting: boolean;
  retraining: boolean;
  datasetId: string;
  columnsText: string;
}
