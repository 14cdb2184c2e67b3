// Incident browser: filter bar, paged table, and a full-record detail panel.
// Filter state and the selected record live in the URL query string, so a
// shared or reloaded URL restores the same view.

import { ApiError, getIncidents, ServiceUnreachableError } from "../api.js";
import type { IncidentFilter } from "../filters.js";
import { filterToSearch, PAGE_SIZE } from "../filters.js";
import type { IncidentPage, IncidentRecord, ActorRef } from "../types.js";
import { MODE_LABELS, recordKey } from "../types.js";
import { clear, el } from "../dom.js";
import type { AppContext } from "../context.js";

const DETAIL_FETCH_LIMIT = 500; // server-side page-size ceiling

export function renderBrowse(root: HTMLElement, ctx: AppContext): void {
  const { state } = ctx;

  const banner = el("div", { class: "banner-slot" });
  const filterError = el("p", { class: "error-inline", id: "filter-error", hidden: true });
  const results = el("div", { class: "results" });
  const detail = el("div", { class: "detail-slot" });
  const form = buildFilterForm(ctx, filterError);
  root.append(banner, form, results, detail);

  function showBanner(message: string): void {
    clear(banner);
    banner.append(
      el("div", { class: "banner", role: "alert" }, [
        el("span", {}, [message]),
        (() => {
          const retry = el("button", { class: "secondary", type: "button" }, ["Retry"]);
          retry.addEventListener("click", () => ctx.refresh());
          return retry;
        })(),
      ]),
    );
  }

  function highlight(key: string | null): void {
    for (const row of results.querySelectorAll("tbody tr")) {
      row.classList.toggle("selected", key !== null && row.getAttribute("data-key") === key);
    }
  }

  function closeDetail(): void {
    state.selected = null;
    state.rowSelector = null;
    const search = filterToSearch(state.filter, null);
    history.replaceState(null, "", `${location.pathname}${search}${location.hash}`);
    clear(detail);
    highlight(null);
  }

  function select(record: IncidentRecord): void {
    state.selected = record;
    state.rowSelector = { source: record.source_dataset, row: record.source_row_id };
    const search = filterToSearch(state.filter, state.rowSelector);
    history.replaceState(null, "", `${location.pathname}${search}${location.hash}`);
    renderDetail(record);
    highlight(recordKey(record));
  }

  function renderDetail(record: IncidentRecord): void {
    clear(detail);
    const rows: Node[] = [];
    const addRow = (name: string, value: Node | string | null): void => {
      if (value === null || value === "") return;
      rows.push(el("dt", {}, [name]));
      rows.push(el("dd", {}, [value]));
    };
    addRow("Type", record.incident_type);
    addRow("Description", record.description);
    addRow("Date", record.Date);
    addRow("Detection", record.detection);
    addRow("Victim", formatActor(record.victim));
    addRow("Attacker", formatActor(record.attacker));
    addRow("Motive", record.Motive);
    addRow("Recorded", record.database_entry_date);
    if (record.Reference) {
      addRow(
        "Reference",
        el("a", { href: record.Reference, target: "_blank", rel: "noopener noreferrer" }, [record.Reference]),
      );
    }
    addRow("Mode", record.Transportation_mode);
    addRow("Record", recordKey(record));
    addRow("Date (ISO)", record.date_iso);
    addRow("Duplicate of", record.duplicate_of);

    const close = el("button", { class: "secondary", type: "button", id: "detail-close" }, ["Close"]);
    close.addEventListener("click", closeDetail);
    detail.append(
      el("div", { class: "detail-panel", id: "detail-panel" }, [
        el("h2", {}, [el("span", {}, [record.attack_name ?? "(unnamed incident)"]), close]),
        el("dl", {}, rows),
      ]),
    );
  }

  function renderResults(page: IncidentPage): void {
    clear(results);
    if (page.items.length === 0) {
      results.append(el("p", { class: "empty-state" }, ["No incidents match the current filter."]));
      return;
    }

    const tbody = el("tbody");
    for (const record of page.items) {
      const row = el("tr", { "data-key": recordKey(record) }, [
        el("td", {}, [record.attack_name ?? "(unnamed incident)"]),
        el("td", {}, [record.Transportation_mode ?? "—"]),
        el("td", {}, [record.Date ?? record.date_iso ?? "—"]),
        el("td", {}, [record.victim.name ?? "—"]),
        el("td", {}, [record.source_dataset]),
      ]);
      row.addEventListener("click", () => select(record));
      tbody.append(row);
    }
    const table = el("table", { class: "incident-table" }, [
      el("thead", {}, [
        el("tr", {}, [
          el("th", {}, ["Name"]),
          el("th", {}, ["Mode"]),
          el("th", {}, ["Date"]),
          el("th", {}, ["Victim"]),
          el("th", {}, ["Source"]),
        ]),
      ]),
      tbody,
    ]);

    const offset = page.offset;
    const prev = el("button", { class: "secondary", type: "button", id: "pager-prev", disabled: offset <= 0 }, ["Previous"]);
    const next = el(
      "button",
      { class: "secondary", type: "button", id: "pager-next", disabled: offset + page.items.length >= page.total },
      ["Next"],
    );
    prev.addEventListener("click", () => {
      const target = Math.max(0, offset - PAGE_SIZE);
      ctx.navigate({ filter: { ...state.filter, offset: target > 0 ? target : undefined } });
    });
    next.addEventListener("click", () => {
      ctx.navigate({ filter: { ...state.filter, offset: offset + PAGE_SIZE } });
    });
    const label = el("span", { class: "pager-label", id: "pager-label" }, [
      `${offset + 1}–${offset + page.items.length} of ${page.total}`,
    ]);

    results.append(table, el("div", { class: "pager" }, [prev, next, label]));
  }

  async function resolveSelection(page: IncidentPage): Promise<void> {
    const selector = state.rowSelector;
    if (!selector) {
      state.selected = null;
      clear(detail);
      return;
    }
    let record =
      page.items.find((r) => r.source_dataset === selector.source && r.source_row_id === selector.row) ?? null;
    if (!record) {
      const fallback = await getIncidents({ source: selector.source }, DETAIL_FETCH_LIMIT);
      record =
        fallback.items.find((r) => r.source_dataset === selector.source && r.source_row_id === selector.row) ?? null;
    }
    state.selected = record;
    if (record) {
      renderDetail(record);
      highlight(recordKey(record));
    } else {
      clear(detail);
      detail.append(
        el("p", { class: "empty-state" }, [`Record ${selector.source}:${selector.row} was not found.`]),
      );
    }
  }

  async function load(): Promise<void> {
    const token = state.beginRequest();
    try {
      const page = await getIncidents(state.filter);
      if (!state.isCurrent(token)) return; // a newer filter superseded this fetch
      state.page = page;
      filterError.hidden = true;
      renderResults(page);
      await resolveSelection(page);
    } catch (err) {
      if (!state.isCurrent(token)) return;
      if (err instanceof ApiError && err.status === 400) {
        filterError.hidden = false;
        filterError.textContent = err.detail || err.slug;
        clear(results);
        clear(detail);
      } else if (err instanceof ServiceUnreachableError) {
        showBanner("Service unreachable — check that the API is running.");
      } else if (err instanceof ApiError) {
        showBanner(`${err.slug}: ${err.detail}`);
      } else {
        showBanner(String(err));
      }
    }
  }

  void ctx.track(load());
}

function formatActor(actor: ActorRef): string | null {
  if (!actor.name && !actor.country && !actor.category) return null;
  const details = [actor.country, actor.category].filter((part): part is string => Boolean(part));
  const name = actor.name ?? "unknown";
  return details.length > 0 ? `${name} (${details.join(", ")})` : name;
}

function buildFilterForm(ctx: AppContext, filterError: HTMLElement): HTMLFormElement {
  const { filter } = ctx.state;

  const modeSelect = el("select", { id: "f-mode", name: "mode" });
  modeSelect.append(el("option", { value: "" }, ["All modes"]));
  const modes: string[] = [...MODE_LABELS];
  if (filter.mode && !modes.includes(filter.mode)) modes.push(filter.mode);
  for (const mode of modes) modeSelect.append(el("option", { value: mode }, [mode]));
  modeSelect.value = filter.mode ?? "";

  const sourceSelect = el("select", { id: "f-source", name: "source" });
  sourceSelect.append(el("option", { value: "" }, ["All sources"]));
  const sources = [...ctx.sources];
  if (filter.source && !sources.includes(filter.source)) sources.push(filter.source);
  for (const source of sources) sourceSelect.append(el("option", { value: source }, [source]));
  sourceSelect.value = filter.source ?? "";

  const yearFrom = el("input", { id: "f-year-from", name: "year_from", type: "number", placeholder: "from" });
  yearFrom.value = filter.year_from !== undefined ? String(filter.year_from) : "";
  const yearTo = el("input", { id: "f-year-to", name: "year_to", type: "number", placeholder: "to" });
  yearTo.value = filter.year_to !== undefined ? String(filter.year_to) : "";
  const textInput = el("input", { id: "f-q", name: "q", type: "search", placeholder: "free text" });
  textInput.value = filter.q ?? "";

  const apply = el("button", { type: "submit", id: "f-apply" }, ["Apply"]);
  const clearButton = el("button", { type: "button", class: "secondary", id: "f-clear" }, ["Clear"]);
  clearButton.addEventListener("click", () => ctx.navigate({ filter: {}, row: null }));

  const form = el("form", { class: "filter-bar" }, [
    el("label", {}, ["Mode", modeSelect]),
    el("label", {}, ["Source", sourceSelect]),
    el("label", {}, ["Year from", yearFrom]),
    el("label", {}, ["Year to", yearTo]),
    el("label", {}, ["Search", textInput]),
    apply,
    clearButton,
    filterError,
  ]);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const next: IncidentFilter = {};
    if (modeSelect.value) next.mode = modeSelect.value;
    if (sourceSelect.value) next.source = sourceSelect.value;
    const from = parseYear(yearFrom.value);
    if (from !== undefined) next.year_from = from;
    const to = parseYear(yearTo.value);
    if (to !== undefined) next.year_to = to;
    const q = textInput.value.trim();
    if (q) next.q = q;
    ctx.navigate({ filter: next, row: null });
  });

  return form;
}

function parseYear(raw: string): number | undefined {
  const text = raw.trim();
  if (!text) return undefined;
  const value = Number(text);
  return Number.isInteger(value) ? value : undefined;
}
