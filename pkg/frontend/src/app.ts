/**
 * Controller: wires the store, the service client, and the DOM together.
 *
 * One delegated click listener and one delegated input listener cover every
 * control the view renders. Mutations follow the same shape: flag the row
 * in-flight, call the service, then either remove the row (success), toast a
 * conflict and refresh (decided elsewhere), or toast the error body.
 */

import { Api, describeError, ServiceError } from "./api.js";
import {
  dismissToast,
  initialState,
  mergePending,
  pushToast,
  removeItem,
  setInFlight,
  setSearch,
  Store,
  toggleExpanded,
} from "./store.js";
import { render } from "./view.js";
import type { Decision } from "./types.js";

export class App {
  readonly store: Store;
  private refreshing = false;
  private readonly onFocus = (): void => {
    if (this.store.get().runIds.length > 0) void this.refresh();
  };

  constructor(
    private readonly root: HTMLElement,
    private readonly api: Api,
    store?: Store,
  ) {
    this.store = store ?? new Store(initialState());
  }

  /** Render once, wire events, then load the schema for the override picker. */
  async start(): Promise<void> {
    this.store.subscribe(() => this.paint());
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("input", (event) => this.onInput(event));
    window.addEventListener("focus", this.onFocus);
    this.paint();
    await this.loadSchema();
  }

  /** Detach window-level listeners; the root is dropped with its subtree. */
  stop(): void {
    window.removeEventListener("focus", this.onFocus);
  }

  private paint(): void {
    const focused = this.captureFocus();
    this.root.innerHTML = render(this.store.get());
    this.restoreFocus(focused);
  }

  /* Re-rendering replaces the DOM, so note where the caret was and put it back. */
  private captureFocus(): { selector: string; caret: number } | null {
    const active = document.activeElement;
    if (!(active instanceof HTMLInputElement) && !(active instanceof HTMLTextAreaElement)) return null;
    if (!this.root.contains(active)) return null;
    const itemId = active.dataset["itemId"];
    const selector = itemId
      ? `.override-search[data-item-id="${itemId}"]`
      : active.id
        ? `#${active.id}`
        : "";
    if (selector === "") return null;
    return { selector, caret: active.selectionStart ?? active.value.length };
  }

  private restoreFocus(focused: { selector: string; caret: number } | null): void {
    if (!focused) return;
    const element = this.root.querySelector(focused.selector);
    if (element instanceof HTMLInputElement || element instanceof HTMLTextAreaElement) {
      element.focus();
      element.setSelectionRange(focused.caret, focused.caret);
    }
  }

  private onClick(event: Event): void {
    const target = event.target as HTMLElement;
    const control = target.closest("[data-action]") as HTMLElement | null;
    if (!control) return;
    const action = control.dataset["action"];
    const itemId = control.dataset["itemId"] ?? "";
    const entryId = control.dataset["entryId"] ?? "";

    switch (action) {
      case "submit-run":
        void this.submitRun();
        break;
      case "refresh":
        void this.refresh();
        break;
      case "retrain":
        void this.retrain();
        break;
      case "retry":
        void this.bootstrap();
        break;
      case "accept":
        void this.decide(itemId, { action: "accept" });
        break;
      case "use-alternate":
      case "override":
        void this.decide(itemId, { action: "override", entry_id: entryId });
        break;
      case "toggle-alternates":
        this.store.update((s) => toggleExpanded(s, itemId));
        break;
      case "dismiss-toast":
        this.store.update((s) => dismissToast(s, Number(control.dataset["index"])));
        break;
    }
  }

  private onInput(event: Event): void {
    const target = event.target;
    if (target instanceof HTMLInputElement && target.classList.contains("override-search")) {
      const itemId = target.dataset["itemId"] ?? "";
      this.store.update((s) => setSearch(s, itemId, target.value));
      return;
    }
    // Form fields must survive unrelated re-renders, so track them silently.
    if (target instanceof HTMLInputElement && target.id === "dataset-id") {
      this.store.patch((s) => ({ ...s, datasetId: target.value }));
    } else if (target instanceof HTMLTextAreaElement && target.id === "columns") {
      this.store.patch((s) => ({ ...s, columnsText: target.value }));
    }
  }

  private async loadSchema(): Promise<void> {
    try {
      const schema = await this.api.schema();
      this.store.update((s) => ({ ...s, schema, banner: null }));
    } catch (err) {
      this.store.update((s) => ({
        ...s,
        banner: { kind: "error", text: describeError(err), retryable: true },
      }));
    }
  }

  /** Retry path for the unreachable banner: schema first, then the queue. */
  async bootstrap(): Promise<void> {
    this.store.update((s) => ({ ...s, banner: null }));
    if (this.store.get().schema === null) await this.loadSchema();
    if (this.store.get().banner === null) await this.refresh();
  }

  async submitRun(): Promise<void> {
    const state = this.store.get();
    const columns = state.columnsText
      .split("\n")
      .map((line) => line.trim())
      .filter((line) => line !== "");
    if (columns.length === 0) {
      this.store.update((s) => pushToast(s, { kind: "info", text: "enter at least one column name" }));
      return;
    }
    this.store.update((s) => ({ ...s, submitting: true }));
    try {
      const run = await this.api.submitRun(state.datasetId.trim(), columns);
      this.store.update((s) => ({
        ...mergePending(s, run.run_id, run.items),
        submitting: false,
        columnsText: "",
      }));
    } catch (err) {
      this.store.update((s) =>
        pushToast({ ...s, submitting: false }, { kind: "error", text: describeError(err) }),
      );
    }
  }

  /** Refetch the pending queue for every known run. */
  async refresh(): Promise<void> {
    if (this.refreshing) return;
    this.refreshing = true;
    try {
      for (const runId of this.store.get().runIds) {
        const fresh = await this.api.pending(runId);
        this.store.update((s) => mergePending(s, runId, fresh));
      }
      this.store.update((s) => (s.banner?.kind === "error" ? { ...s, banner: null } : s));
    } catch (err) {
      this.store.update((s) => ({
        ...s,
        banner: { kind: "error", text: describeError(err), retryable: true },
      }));
    } finally {
      this.refreshing = false;
    }
  }

  async decide(itemId: string, decision: Decision): Promise<void> {
    const row = this.store.get().items.find((r) => r.item.item_id === itemId);
    if (!row || row.inFlight) return; // double submit guard
    this.store.update((s) => setInFlight(s, itemId, true));
    try {
      await this.api.decide(itemId, decision);
      this.store.update((s) => removeItem(s, itemId));
    } catch (err) {
      if (err instanceof ServiceError && err.code === "already_decided") {
        this.store.update((s) =>
          pushToast(removeItem(s, itemId), { kind: "conflict", text: "already decided elsewhere" }),
        );
        await this.refresh();
      } else {
        this.store.update((s) =>
          pushToast(setInFlight(s, itemId, false), { kind: "error", text: describeError(err) }),
        );
      }
    }
  }

  async retrain(): Promise<void> {
    if (this.store.get().retraining) return;
    this.store.update((s) => ({ ...s, retraining: true, banner: null }));
    try {
      const result = await this.api.retrain();
      this.store.update((s) => {
        // Nudge the steward to resubmit what is still pending: prefill the form.
        const remaining = [...new Set(s.items.map((r) => r.item.result.source_column))];
        return {
          ...s,
          retraining: false,
          version: result.version,
          columnsText: remaining.join("\n"),
          banner: {
            kind: "version",
            text:
              `classifier v${result.version} trained on ${result.n_records} decisions; ` +
              "resubmit the remaining columns to use it",
            retryable: false,
          },
        };
      });
    } catch (err) {
      const guidance = err instanceof ServiceError && err.code === "empty_log";
      this.store.update((s) => ({
        ...s,
        retraining: false,
        banner: {
          kind: guidance ? "guidance" : "error",
          text: describeError(err),
          retryable: err instanceof ServiceError && err.retryable,
        },
      }));
    }
  }
}
