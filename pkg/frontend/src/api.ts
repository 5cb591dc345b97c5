/**
 * Thin fetch client for the review service wire API.
 *
 * Every non-2xx response carries a machine-readable body
 * {code, message, field?}; this module turns those into ServiceError so
 * callers can branch on `code` and always have something to render.
 */

import type { Decision, ErrorBody, RetrainResponse, ReviewItem, Run, StandardSchema } from "./types.js";

export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;
  /* True when the request never reached the service. */
  readonly retryable: boolean;

  constructor(status: number, code: string, message: string, field?: string, retryable = false) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
    this.code = code;
    this.field = field;
    this.retryable = retryable;
  }
}

/** One-line rendering of any error, ServiceError or not. */
export function describeError(err: unknown): string {
  if (err instanceof ServiceError) {
    const suffix = err.field ? ` (field: ${err.field})` : "";
    return `${err.code}: ${err.message}${suffix}`;
  }
  return err instanceof Error ? err.message : String(err);
}

export class Api {
  /* Base URL of the service; empty string means same origin. */
  constructor(private readonly base: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, init);
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      throw new ServiceError(0, "unreachable", `service unreachable: ${reason}`, undefined, true);
    }
    const text = await response.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!response.ok) {
      const body = (parsed ?? {}) as Partial<ErrorBody>;
      throw new ServiceError(
        response.status,
        body.code ?? `http_${response.status}`,
        body.message ?? (text || response.statusText),
        body.field,
      );
    }
    return parsed as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  submitRun(datasetId: string, columns: string[]): Promise<Run> {
    const source = { dataset_id: datasetId, columns: columns.map((name) => ({ name })) };
    return this.post<Run>("/runs", { source });
  }

  pending(runId: string): Promise<ReviewItem[]> {
    return this.request<ReviewItem[]>(`/runs/${runId}/pending`);
  }

  decide(itemId: string, decision: Decision): Promise<ReviewItem> {
    return this.post<ReviewItem>(`/items/${itemId}/decision`, decision);
  }

  retrain(): Promise<RetrainResponse> {
    return this.post<RetrainResponse>("/retrain", {});
  }

  schema(): Promise<StandardSchema> {
    return this.request<StandardSchema>("/schema");
  }
}
