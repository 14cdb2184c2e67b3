// Incident filter state and its two serialized forms: the page URL query
// string (shareable, reload-safe) and the API query parameters.

import { splitKey } from "./types.js";

export interface IncidentFilter {
  mode?: string;
  source?: string;
  year_from?: number;
  year_to?: number;
  q?: string;
  offset?: number;
}

/** Record selected for the detail panel, addressed via the URL. */
export interface RowSelector {
  source: string;
  row: string;
}

export interface ParsedLocation {
  filter: IncidentFilter;
  row: RowSelector | null;
}

export const PAGE_SIZE = 25;

/** Read filter state (and an optional selected row) back from a query string. */
export function searchToFilter(search: string): ParsedLocation {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const filter: IncidentFilter = {};

  const mode = params.get("mode");
  if (mode) filter.mode = mode;
  const source = params.get("source");
  if (source) filter.source = source;
  const q = params.get("q");
  if (q && q.trim()) filter.q = q.trim();

  for (const key of ["year_from", "year_to", "offset"] as const) {
    const raw = params.get(key);
    if (raw === null || raw.trim() === "") continue;
    const value = Number(raw);
    if (Number.isInteger(value)) filter[key] = value;
  }

  const rowKey = params.get("row");
  const parts = rowKey ? splitKey(rowKey) : null;
  return {
    filter,
    row: parts,
  };
}

/**
 * Serialize filter state into the page query string. The selected row is
 * carried as its full `source:rowid` key, so a shared URL restores both the
 * filter and the open detail panel.
 */
export function filterToSearch(filter: IncidentFilter, row: RowSelector | null = null): string {
  const params = new URLSearchParams();
  if (filter.mode) params.set("mode", filter.mode);
  if (filter.source) params.set("source", filter.source);
  if (filter.year_from !== undefined) params.set("year_from", String(filter.year_from));
  if (filter.year_to !== undefined) params.set("year_to", String(filter.year_to));
  if (filter.q) params.set("q", filter.q);
  if (filter.offset) params.set("offset", String(filter.offset));
  if (row) params.set("row", `${row.source}:${row.row}`);
  const text = params.toString();
  return text ? `?${text}` : "";
}

/** Build the /api/incidents query parameters for a filter and page size. */
export function filterToParams(filter: IncidentFilter, limit: number = PAGE_SIZE): URLSearchParams {
  const params = new URLSearchParams();
  if (filter.mode) params.set("mode", filter.mode);
  if (filter.source) params.set("source", filter.source);
  if (filter.year_from !== undefined) params.set("year_from", String(filter.year_from));
  if (filter.year_to !== undefined) params.set("year_to", String(filter.year_to));
  if (filter.q) params.set("q", filter.q);
  params.set("offset", String(filter.offset ?? 0));
  params.set("limit", String(limit));
  return params;
}
