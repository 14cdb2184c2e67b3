// Session state for the browser interface. Q&A history is append-only for
// the lifetime of the page; filter state itself lives in the URL (see
// filters.ts) and is re-read on every render.

import type { IncidentFilter, RowSelector } from "./filters.js";
import type { IncidentPage, IncidentRecord, QueryResult } from "./types.js";

export type QaErrorKind = "empty_retrieval" | "provider" | "unreachable" | "invalid";

export interface QaEntry {
  readonly question: string;
  result: QueryResult | null;
  error: { kind: QaErrorKind; message: string } | null;
}

export class BrowserState {
  filter: IncidentFilter = {};
  rowSelector: RowSelector | null = null;
  page: IncidentPage | null = null;
  selected: IncidentRecord | null = null;
  /** Append-only within a session: entries are only ever pushed. */
  readonly qaHistory: QaEntry[] = [];
  askDraft = "";

  #sequence = 0;

  /** Mark the start of an incidents fetch; later fetches supersede it. */
  beginRequest(): number {
    return ++this.#sequence;
  }

  /** True while no newer incidents fetch has started (last write wins). */
  isCurrent(token: number): boolean {
    return token === this.#sequence;
  }

  appendQa(question: string): QaEntry {
    const entry: QaEntry = { question, result: null, error: null };
    this.qaHistory.push(entry);
    return entry;
  }
}
