// Deterministic incident dataset for tests. Field values cycle so every
// filter facet (mode, source, year, free text) has known, non-trivial hits.

import type { IncidentRecord } from "../src/types.js";

const SOURCES = ["umced", "eurepoc", "mcad", "tracr"] as const;
const MODES = ["Aviation", "Maritime", "Rail", "Road", "Multimodal", "Maritime"] as const;
const TYPES = ["Ransomware", "Phishing", "Wiper", "DDoS"] as const;
const MOTIVES = ["financial", "political", "sabotage", "unknown"] as const;
const COUNTRIES = ["Canada", "Germany", "UK", "Japan"] as const;
const MONTHS = [
  "January", "February", "March", "April", "May", "June",
  "July", "August", "September", "October", "November", "December",
] as const;

function rowId(source: string, i: number): string {
  switch (source) {
    case "umced":
      return `U-${100 + i}`;
    case "eurepoc":
      return `E-${100 + i}`;
    case "tracr":
      return `T${i}`;
    default:
      return String(i);
  }
}

export function makeRecord(i: number): IncidentRecord {
  const source = SOURCES[i % SOURCES.length]!;
  const row = rowId(source, i);
  const mode = MODES[i % MODES.length]!;
  const type = TYPES[i % TYPES.length]!;
  const year = 2015 + (i % 9);
  const month = 1 + (i % 12);
  const undated = i === 5;
  const victimName = `Operator ${i}`;

  return {
    attack_name: `${victimName} ${type.toLowerCase()} incident`,
    incident_type: type,
    description:
      `A ${type.toLowerCase()} attack disrupted ${victimName} systems and ` +
      `interrupted ${mode.toLowerCase()} operations for ${1 + (i % 4)} days.`,
    Date: undated ? null : `${MONTHS[month - 1]} ${year}`,
    detection: null,
    victim: {
      name: victimName,
      country: COUNTRIES[i % COUNTRIES.length]!,
      category: i % 3 === 0 ? "corporate" : null,
    },
    attacker: {
      name: i % 5 === 0 ? null : `Crew ${i % 7}`,
      country: null,
      category: i % 2 === 0 ? "criminal" : null,
    },
    Motive: MOTIVES[i % MOTIVES.length]!,
    database_entry_date: null,
    Reference: `https://example.org/${source}/${row}`,
    Transportation_mode: mode,
    source_dataset: source,
    source_row_id: row,
    date_iso: undated ? null : `${year}-${String(month).padStart(2, "0")}`,
    duplicate_of: i === 7 ? "umced:U-100" : null,
  };
}

export function makeDataset(count = 24): IncidentRecord[] {
  return Array.from({ length: count }, (_, i) => makeRecord(i));
}
