/**
 * Pure rendering: AppState in, HTML string out.
 *
 * Interactive elements carry data-action attributes; the controller owns the
 * single delegated listener. Nothing in here mutates state or talks to the
 * service.
 */

import { entryName, searchEntries } from "./store.js";
import type { AppState, UiReviewItem } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function renderBreadcrumb(path: string[]): string {
  if (path.length === 0) return "";
  const crumbs = path
    .map((tier) => `<span class="crumb">${escapeHtml(tier)}</span>`)
    .join('<span class="crumb-sep">&rsaquo;</span>');
  return `<nav class="breadcrumb">${crumbs}</nav>`;
}

function renderBanner(state: AppState): string {
  if (!state.banner) return "";
  const retry = state.banner.retryable
    ? '<button data-action="retry" class="banner-retry">Retry</button>'
    : "";
  return `
    <div class="banner banner-${state.banner.kind}" role="status">
      <span>${escapeHtml(state.banner.text)}</span>
      ${retry}
    </div>
  `;
}

function renderToasts(state: AppState): string {
  const toasts = state.toasts
    .map(
      (toast, i) => `
        <div class="toast toast-${toast.kind}">
          <span>${escapeHtml(toast.text)}</span>
          <button data-action="dismiss-toast" data-index="${i}" aria-label="dismiss">&times;</button>
        </div>
      `,
    )
    .join("");
  return `<div class="toasts">${toasts}</div>`;
}

function renderSubmit(state: AppState): string {
  const disabled = state.submitting ? "disabled" : "";
  return `
    <section class="submit">
      <h2>Submit columns</h2>
      <div class="submit-fields">
        <input id="dataset-id" placeholder="dataset id" value="${escapeHtml(state.datasetId)}" ${disabled}>
        <textarea id="columns" rows="3" placeholder="one column name per line" ${disabled}>${escapeHtml(state.columnsText)}</textarea>
        <button data-action="submit-run" ${disabled}>Match columns</button>
      </div>
    </section>
  `;
}

function renderAlternates(row: UiReviewItem, state: AppState): string {
  const alternates = row.item.result.alternates;
  if (!row.expanded || alternates.length === 0) return "";
  const disabled = row.inFlight ? "disabled" : "";
  const lines = alternates
    .map(
      ([entryId, score]) => `
        <li>
          <span class="alt-name">${escapeHtml(entryName(state.schema, entryId))}</span>
          <span class="entry-id">${escapeHtml(entryId)}</span>
          <span class="alt-score">${score}</span>
          <button data-action="use-alternate" data-item-id="${row.item.item_id}"
                  data-entry-id="${escapeHtml(entryId)}" ${disabled}>Use</button>
        </li>
      `,
    )
    .join("");
  return `<ul class="alternates">${lines}</ul>`;
}

function renderPicker(row: UiReviewItem, state: AppState): string {
  if (row.search.trim() === "") return "";
  const hits = searchEntries(state.schema, row.search);
  const disabled = row.inFlight ? "disabled" : "";
  if (hits.length === 0) {
    return '<ul class="picker"><li class="no-hits">no entries match</li></ul>';
  }
  const lines = hits
    .map(
      (entry) => `
        <li>
          <span class="pick-name">${escapeHtml(entry.name)}</span>
          <span class="pick-path">${escapeHtml(entry.path.join(" / "))}</span>
          <button data-action="override" data-item-id="${row.item.item_id}"
                  data-entry-id="${escapeHtml(entry.id)}" ${disabled}>Pick</button>
        </li>
      `,
    )
    .join("");
  return `<ul class="picker">${lines}</ul>`;
}

function renderRow(row: UiReviewItem, state: AppState): string {
  const result = row.item.result;
  const disabled = row.inFlight ? "disabled" : "";
  const matched = result.matched_entry_id !== null;

  const suggestion = matched
    ? `
      <span class="arrow">&rarr;</span>
      <span class="suggestion">${escapeHtml(entryName(state.schema, result.matched_entry_id ?? ""))}</span>
      <span class="entry-id">${escapeHtml(result.matched_entry_id ?? "")}</span>
    `
    : '<span class="no-suggestion">no suggested entry</span>';

  const accept = matched
    ? `<button data-action="accept" data-item-id="${row.item.item_id}" ${disabled}>Accept</button>`
    : "";
  const alternatesToggle =
    matched && result.alternates.length > 0
      ? `<button data-action="toggle-alternates" data-item-id="${row.item.item_id}" ${disabled}>
           Alternates (${result.alternates.length})
         </button>`
      : "";

  return `
    <li class="row confidence-${result.confidence}${row.inFlight ? " in-flight" : ""}"
        data-item-id="${row.item.item_id}">
      <div class="row-head">
        <span class="badge badge-${result.confidence}">${result.confidence}</span>
        <span class="source">${escapeHtml(result.source_column)}</span>
        ${suggestion}
        <span class="score">${result.score}</span>
        <span class="method">${escapeHtml(result.method)}</span>
      </div>
      ${matched ? renderBreadcrumb(result.predicted_path) : ""}
      <div class="actions">
        ${accept}
        ${alternatesToggle}
        <input class="override-search" data-item-id="${row.item.item_id}"
               placeholder="Search schema to override" value="${escapeHtml(row.search)}" ${disabled}>
      </div>
      ${renderAlternates(row, state)}
      ${renderPicker(row, state)}
    </li>
  `;
}

function renderQueue(state: AppState): string {
  let body: string;
  if (state.items.length > 0) {
    body = `<ul class="rows">${state.items.map((row) => renderRow(row, state)).join("")}</ul>`;
  } else if (state.runIds.length > 0) {
    body = '<p class="all-reviewed">All reviewed</p>';
  } else {
    body = '<p class="queue-hint">Submit source columns to start reviewing</p>';
  }
  return `
    <section class="queue">
      <div class="queue-head">
        <h2>Pending <span class="count">${state.items.length}</span></h2>
        <button data-action="refresh">Refresh</button>
      </div>
      ${body}
    </section>
  `;
}

export function render(state: AppState): string {
  const versionBadge =
    state.version !== null ? `<span class="version-badge">classifier v${state.version}</span>` : "";
  const retrainDisabled = state.retraining ? "disabled" : "";
  return `
    <header>
      <h1>metaharmon review</h1>
      <div class="header-right">
        ${versionBadge}
        <button data-action="retrain" ${retrainDisabled}>Retrain</button>
      </div>
    </header>
    ${renderBanner(state)}
    ${renderSubmit(state)}
    ${renderQueue(state)}
    ${renderToasts(state)}
  `;
}
