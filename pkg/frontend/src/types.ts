// Shapes returned by the knowledge-base HTTP API. The UI renders these
// verbatim; it never derives data the API did not return.

export interface ActorRef {
  name: string | null;
  country: string | null;
  category: string | null;
}

export interface IncidentRecord {
  attack_name: string | null;
  incident_type: string | null;
  description: string | null;
  Date: string | null;
  detection: string | null;
  victim: ActorRef;
  attacker: ActorRef;
  Motive: string | null;
  database_entry_date: string | null;
  Reference: string | null;
  Transportation_mode: string | null;
  source_dataset: string;
  source_row_id: string;
  date_iso: string | null;
  duplicate_of: string | null;
}

export interface IncidentPage {
  total: number;
  offset: number;
  limit: number;
  items: IncidentRecord[];
}

export interface RetrievalRow {
  rank: number;
  chunk_id: number;
  dense: number;
  sparse: number;
  hybrid: number;
  record_keys: string[];
}

export interface QueryResult {
  question: string;
  answer: string;
  cited_keys: string[];
  batch_count: number;
  results: RetrievalRow[];
}

export interface Stats {
  total: number;
  by_mode: Record<string, number>;
  by_source: Record<string, number>;
  by_year: Record<string, number>;
  duplicates: number;
  chunks: number;
  embedding_provider: string;
}

/** Mode labels accepted by the API's `mode` filter. */
export const MODE_LABELS = ["Aviation", "Maritime", "Rail", "Road", "Multimodal"] as const;

/** Stable identifier of a record, as used in `cited_keys` and `duplicate_of`. */
export function recordKey(record: Pick<IncidentRecord, "source_dataset" | "source_row_id">): string {
  return `${record.source_dataset}:${record.source_row_id}`;
}

/** Split a `source:rowid` key at the first colon. */
export function splitKey(key: string): { source: string; row: string } | null {
  const i = key.indexOf(":");
  if (i <= 0 || i === key.length - 1) return null;
  return { source: key.slice(0, i), row: key.slice(i + 1) };
}
