/** Shared builders for wire objects and a small schema used across tests. */

import type {
  AppState,
  MatchResult,
  ReviewItem,
  SchemaEntry,
  StandardSchema,
  UiReviewItem,
} from "../src/types.js";
import { initialState } from "../src/store.js";

export function result(overrides: Partial<MatchResult> = {}): MatchResult {
  return {
    source_column: "straw",
    matched_entry_id: "e0002",
    predicted_path: ["plastics", "soft plastics"],
    score: 86,
    method: "levenshtein",
    confidence: "qualified",
    alternates: [],
    ...overrides,
  };
}

export function item(
  itemId: string,
  overrides: Partial<MatchResult> = {},
  status: ReviewItem["status"] = "pending",
  runId = "r0001",
): ReviewItem {
  return { item_id: itemId, run_id: runId, status, result: result(overrides), decided: null };
}

export function row(
  itemId: string,
  overrides: Partial<MatchResult> = {},
  ui: Partial<Omit<UiReviewItem, "item">> = {},
): UiReviewItem {
  return { item: item(itemId, overrides), expanded: false, inFlight: false, search: "", ...ui };
}

function entry(id: string, name: string, path: string[]): SchemaEntry {
  return {
    id,
    name,
    verbose_name: null,
    business_terms: [],
    description: null,
    glossary_terms: [],
    dictionary_entry: null,
    path,
  };
}

export const SCHEMA: StandardSchema = {
  name: "std",
  normalized: true,
  entries: [
    entry("e0001", "plates", ["Metal"]),
    entry("e0002", "straw", ["plastics", "soft plastics"]),
    entry("e0003", "plastic bag", ["plastics", "soft plastics"]),
    entry("e0014", "fishing net", ["plastics", "fishing gear"]),
  ],
};

export function stateWith(partial: Partial<AppState>): AppState {
  return { ...initialState(), schema: SCHEMA, ...partial };
}

/** Poll until the condition holds; DOM updates land on later microtasks. */
export async function until(cond: () => boolean, ms = 2_000): Promise<void> {
  const deadline = Date.now() + ms;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error("condition not met in time");
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}
