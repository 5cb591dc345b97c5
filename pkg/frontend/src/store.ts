/**
 * Application state container and the pure transition helpers around it.
 *
 * The view is a pure function of this state: everything shown on screen is
 * either the last service response or an in-flight flag, never derived
 * client-side truth.
 */

import type { AppState, ReviewItem, SchemaEntry, StandardSchema, Toast, UiReviewItem } from "./types.js";

export type Listener = (state: AppState) => void;

export class Store {
  private state: AppState;
  private listeners: Listener[] = [];

  constructor(initial: AppState = initialState()) {
    this.state = initial;
  }

  get(): AppState {
    return this.state;
  }

  set(next: AppState): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  update(fn: (state: AppState) => AppState): void {
    this.set(fn(this.state));
  }

  /* Replace state without notifying; for keystrokes that must not re-render. */
  patch(fn: (state: AppState) => AppState): void {
    this.state = fn(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}

export function initialState(): AppState {
  return {
    schema: null,
    items: [],
    runIds: [],
    version: null,
    banner: null,
    toasts: [],
    submitting: false,
    retraining: false,
    datasetId: "",
    columnsText: "",
  };
}

/** Ascending by score, ties by item id; mirrors the service's pending order. */
export function sortPending(items: UiReviewItem[]): UiReviewItem[] {
  return [...items].sort(
    (a, b) =>
      a.item.result.score - b.item.result.score ||
      (a.item.item_id < b.item.item_id ? -1 : a.item.item_id > b.item.item_id ? 1 : 0),
  );
}

/**
 * Replace one run's rows with a fresh pending response, keeping any display
 * state (expansion, picker text) for items that are still pending.
 */
export function mergePending(state: AppState, runId: string, fresh: ReviewItem[]): AppState {
  const carried = new Map(state.items.map((row) => [row.item.item_id, row]));
  const kept = state.items.filter((row) => row.item.run_id !== runId);
  const rows = fresh
    .filter((item) => item.status === "pending")
    .map((item) => {
      const prev = carried.get(item.item_id);
      return {
        item,
        expanded: prev?.expanded ?? false,
        inFlight: false,
        search: prev?.search ?? "",
      };
    });
  const runIds = state.runIds.includes(runId) ? state.runIds : [...state.runIds, runId];
  return { ...state, runIds, items: sortPending([...kept, ...rows]) };
}

export function removeItem(state: AppState, itemId: string): AppState {
  return { ...state, items: state.items.filter((row) => row.item.item_id !== itemId) };
}

function mapRow(state: AppState, itemId: string, fn: (row: UiReviewItem) => UiReviewItem): AppState {
  return {
    ...state,
    items: state.items.map((row) => (row.item.item_id === itemId ? fn(row) : row)),
  };
}

export function setInFlight(state: AppState, itemId: string, inFlight: boolean): AppState {
  return mapRow(state, itemId, (row) => ({ ...row, inFlight }));
}

export function setSearch(state: AppState, itemId: string, search: string): AppState {
  return mapRow(state, itemId, (row) => ({ ...row, search }));
}

export function toggleExpanded(state: AppState, itemId: string): AppState {
  return mapRow(state, itemId, (row) => ({ ...row, expanded: !row.expanded }));
}

export function pushToast(state: AppState, toast: Toast): AppState {
  return { ...state, toasts: [...state.toasts, toast] };
}

export function dismissToast(state: AppState, index: number): AppState {
  return { ...state, toasts: state.toasts.filter((_, i) => i !== index) };
}

/** Entry name for display; falls back to the raw id before /schema loads. */
export function entryName(schema: StandardSchema | null, entryId: string): string {
  const entry = schema?.entries.find((e) => e.id === entryId);
  return entry ? entry.name : entryId;
}

export function entryById(schema: StandardSchema | null, entryId: string): SchemaEntry | null {
  return schema?.entries.find((e) => e.id === entryId) ?? null;
}

/**
 * Case-insensitive substring search over entry names and tier paths.
 * Schema sizes here are hundreds of entries, so a linear scan is fine.
 */
export function searchEntries(schema: StandardSchema | null, query: string, limit = 8): SchemaEntry[] {
  const needle = query.trim().toLowerCase();
  if (!schema || needle === "") return [];
  const hits: SchemaEntry[] = [];
  for (const entry of schema.entries) {
    const haystack = `${entry.name} ${entry.path.join(" ")}`.toLowerCase();
    if (haystack.includes(needle)) {
      hits.push(entry);
      if (hits.length >= limit) break;
    }
  }
  return hits;
}
