// Thin typed client for the documented API routes. Every request the UI
// makes goes through here.

import type { IncidentPage, QueryResult, Stats } from "./types.js";
import type { IncidentFilter } from "./filters.js";
import { filterToParams, PAGE_SIZE } from "./filters.js";

let apiBase = "";

/** Point the client at a non-same-origin API (used by tooling; the browser
 * default is same-origin relative paths). */
export function configureApi(options: { base?: string }): void {
  if (options.base !== undefined) apiBase = options.base.replace(/\/+$/, "");
}

/** Structured error body returned by the API (`{"error": slug, "detail": …}`). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly slug: string,
    readonly detail: string,
  ) {
    super(`${slug}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The fetch itself failed: no server, refused connection, network down. */
export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super("service unreachable", { cause });
    this.name = "ServiceUnreachableError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(apiBase + path, init);
  } catch (cause) {
    throw new ServiceUnreachableError(cause);
  }
  if (!response.ok) {
    let slug = `http_${response.status}`;
    let detail = response.statusText;
    try {
      const body: unknown = await response.json();
      if (body && typeof body === "object" && typeof (body as { error?: unknown }).error === "string") {
        slug = (body as { error: string }).error;
        detail = String((body as { detail?: unknown }).detail ?? "");
      }
    } catch {
      // non-JSON error body; keep the HTTP status text
    }
    throw new ApiError(response.status, slug, detail);
  }
  return (await response.json()) as T;
}

export function getIncidents(filter: IncidentFilter, limit: number = PAGE_SIZE): Promise<IncidentPage> {
  const params = filterToParams(filter, limit);
  return request<IncidentPage>(`/api/incidents?${params.toString()}`);
}

export function postQuery(
  question: string,
  options: { k?: number; alpha?: number } = {},
): Promise<QueryResult> {
  return request<QueryResult>("/api/query", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ question, ...options }),
  });
}

export function getStats(): Promise<Stats> {
  return request<Stats>("/api/stats");
}
