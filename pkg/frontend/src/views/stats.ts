// Dashboard: headline counts and three charts, all taken verbatim from
// /api/stats — the view never recomputes or aggregates on its own.

import { ApiError, getStats, ServiceUnreachableError } from "../api.js";
import type { Stats } from "../types.js";
import { barChartSvg, hbarListHtml, lineChartSvg } from "../charts.js";
import { clear, el } from "../dom.js";
import type { AppContext } from "../context.js";

export function renderStats(root: HTMLElement, ctx: AppContext): void {
  const host = el("div", { class: "stats-view" });
  root.append(host);

  function showBanner(message: string): void {
    clear(host);
    const retry = el("button", { class: "secondary", type: "button" }, ["Retry"]);
    retry.addEventListener("click", () => ctx.refresh());
    host.append(el("div", { class: "banner", role: "alert" }, [el("span", {}, [message]), retry]));
  }

  function renderDashboard(stats: Stats): void {
    clear(host);

    const card = (name: string, value: string, id: string) =>
      el("div", { class: "stat-card", id }, [
        el("div", { class: "stat-value" }, [value]),
        el("div", { class: "stat-name" }, [name]),
      ]);
    host.append(
      el("div", { class: "stat-cards" }, [
        card("Incidents", String(stats.total), "stat-total"),
        card("Duplicates flagged", String(stats.duplicates), "stat-duplicates"),
        card("Indexed chunks", String(stats.chunks), "stat-chunks"),
        card("Embedding provider", stats.embedding_provider, "stat-provider"),
      ]),
    );

    const modeBlock = el("div", { class: "chart-block", id: "chart-mode" });
    modeBlock.innerHTML = barChartSvg(stats.by_mode, "Incidents by transportation mode");
    const yearBlock = el("div", { class: "chart-block", id: "chart-year" });
    yearBlock.innerHTML = lineChartSvg(stats.by_year, "Incidents per year");
    const sourceBlock = el("div", { class: "chart-block", id: "chart-source" });
    sourceBlock.innerHTML = `<h3>Incidents by source feed</h3>${hbarListHtml(stats.by_source)}`;
    host.append(modeBlock, yearBlock, sourceBlock);
  }

  void ctx.track(
    getStats().then(renderDashboard, (err: unknown) => {
      if (err instanceof ServiceUnreachableError) {
        showBanner("Service unreachable — check that the API is running.");
      } else if (err instanceof ApiError) {
        showBanner(`${err.slug}: ${err.detail}`);
      } else {
        showBanner(String(err));
      }
    }),
  );
}
