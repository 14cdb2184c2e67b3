// Capabilities the router hands to each view.

import type { BrowserState } from "./state.js";
import type { IncidentFilter, RowSelector } from "./filters.js";

export interface AppContext {
  readonly state: BrowserState;
  /** Source feed names learned from /api/stats (may be empty before it loads). */
  readonly sources: string[];
  /** Register async work so callers can await a quiescent UI. */
  track<T>(promise: Promise<T>): Promise<T>;
  /** Update URL state and re-render (pushState; no full page load). */
  navigate(target: { filter?: IncidentFilter; row?: RowSelector | null; hash?: string }): void;
  /** Re-render the active view without touching the URL. */
  refresh(): void;
}
