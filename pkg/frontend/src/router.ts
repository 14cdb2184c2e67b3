// Application shell: hash-based view routing with filter state carried in
// the URL query string, plus async-work tracking so callers (and tests) can
// await a quiescent UI.

import { getStats } from "./api.js";
import type { AppContext } from "./context.js";
import type { IncidentFilter, RowSelector } from "./filters.js";
import { filterToSearch, searchToFilter } from "./filters.js";
import { BrowserState } from "./state.js";
import { clear, el } from "./dom.js";
import { renderAsk } from "./views/ask.js";
import { renderBrowse } from "./views/browse.js";
import { renderStats } from "./views/stats.js";

export type ViewName = "browse" | "ask" | "stats";

export function parseHash(hash: string): ViewName {
  const name = hash.replace(/^#\/?/, "").split("?")[0];
  if (name === "ask") return "ask";
  if (name === "stats") return "stats";
  return "browse";
}

export class App implements AppContext {
  readonly state = new BrowserState();
  sources: string[] = [];

  #viewHost: HTMLElement;
  #navLinks: Record<ViewName, HTMLAnchorElement>;
  #pending = new Set<Promise<void>>();

  constructor(root: HTMLElement) {
    clear(root);
    const links: Record<ViewName, HTMLAnchorElement> = {
      browse: el("a", { href: "#/browse" }, ["Browse"]),
      ask: el("a", { href: "#/ask" }, ["Ask"]),
      stats: el("a", { href: "#/stats" }, ["Dashboard"]),
    };
    this.#navLinks = links;
    this.#viewHost = el("main", { id: "view" });
    root.append(
      el("header", { class: "app-header" }, [
        el("h1", {}, ["Transportation Incident Knowledge Base"]),
        el("nav", { class: "app-nav", "aria-label": "Views" }, [links.browse, links.ask, links.stats]),
      ]),
      this.#viewHost,
    );
  }

  start(): void {
    window.addEventListener("hashchange", () => this.render());
    window.addEventListener("popstate", () => this.render());
    // Source names for the filter dropdown come from the stats route; the
    // UI works (with a free-typed source still honored via the URL) if this
    // fails, so errors only leave the list empty.
    void this.track(
      getStats().then(
        (stats) => {
          this.sources = Object.keys(stats.by_source).sort();
          this.render();
        },
        () => {
          this.sources = [];
        },
      ),
    );
    this.render();
  }

  track<T>(promise: Promise<T>): Promise<T> {
    const marker: Promise<void> = promise
      .then(
        () => undefined,
        () => undefined,
      )
      .finally(() => {
        this.#pending.delete(marker);
      });
    this.#pending.add(marker);
    return promise;
  }

  /** Resolves once all tracked async work (including work it spawned) settles. */
  async whenIdle(): Promise<void> {
    while (this.#pending.size > 0) {
      await Promise.allSettled([...this.#pending]);
    }
    await Promise.resolve();
  }

  navigate(target: { filter?: IncidentFilter; row?: RowSelector | null; hash?: string }): void {
    const filter = target.filter ?? this.state.filter;
    const row = target.row !== undefined ? target.row : this.state.rowSelector;
    const rawHash = target.hash ?? location.hash ?? "#/browse";
    const hash = rawHash.startsWith("#") ? rawHash : `#${rawHash}`;
    const search = filterToSearch(filter, row);
    history.pushState(null, "", `${location.pathname}${search}${hash}`);
    this.render();
  }

  refresh(): void {
    this.render();
  }

  render(): void {
    const { filter, row } = searchToFilter(location.search);
    this.state.filter = filter;
    this.state.rowSelector = row;

    const view = parseHash(location.hash);
    for (const [name, link] of Object.entries(this.#navLinks) as [ViewName, HTMLAnchorElement][]) {
      link.classList.toggle("active", name === view);
    }

    clear(this.#viewHost);
    if (view === "ask") {
      renderAsk(this.#viewHost, this);
    } else if (view === "stats") {
      renderStats(this.#viewHost, this);
    } else {
      renderBrowse(this.#viewHost, this);
    }
  }
}

export function boot(root: HTMLElement): App {
  const app = new App(root);
  app.start();
  return app;
}
