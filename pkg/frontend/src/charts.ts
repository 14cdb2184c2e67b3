// Dependency-free SVG/HTML chart builders. Each function renders the values
// it is given verbatim — no client-side aggregation or recomputation.

import { esc } from "./dom.js";

const SVG_NS = 'xmlns="http://www.w3.org/2000/svg"';

function svgShell(title: string, width: number, height: number, body: string): string {
  return (
    `<svg ${SVG_NS} role="img" aria-label="${esc(title)}" viewBox="0 0 ${width} ${height}">` +
    `<text class="chart-title" x="12" y="18">${esc(title)}</text>${body}</svg>`
  );
}

/** Vertical bar chart keyed by category (e.g. incidents per mode). */
export function barChartSvg(
  data: Record<string, number>,
  title: string,
  width = 520,
  height = 250,
): string {
  const entries = Object.entries(data);
  if (entries.length === 0) {
    return svgShell(title, width, height, `<text class="label" x="${width / 2}" y="${height / 2}">no data</text>`);
  }
  const pad = { top: 36, right: 14, bottom: 30, left: 14 };
  const innerW = width - pad.left - pad.right;
  const innerH = height - pad.top - pad.bottom;
  const max = Math.max(1, ...entries.map(([, v]) => v));
  const slot = innerW / entries.length;
  const barW = Math.min(64, slot * 0.62);

  let body = "";
  entries.forEach(([label, value], i) => {
    const h = (value / max) * innerH;
    const x = pad.left + i * slot + (slot - barW) / 2;
    const y = pad.top + innerH - h;
    const cx = pad.left + i * slot + slot / 2;
    body += `<rect class="bar" data-key="${esc(label)}" data-value="${value}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${barW.toFixed(1)}" height="${h.toFixed(1)}" rx="3"></rect>`;
    body += `<text class="value" x="${cx.toFixed(1)}" y="${(y - 5).toFixed(1)}">${value}</text>`;
    body += `<text class="label" x="${cx.toFixed(1)}" y="${height - 9}">${esc(label)}</text>`;
  });
  return svgShell(title, width, height, body);
}

/** Time-series line chart keyed by year. Gaps between years keep their width. */
export function lineChartSvg(
  data: Record<string, number>,
  title: string,
  width = 520,
  height = 250,
): string {
  const entries = Object.entries(data)
    .map(([year, value]) => ({ year: Number(year), value }))
    .filter((p) => Number.isFinite(p.year))
    .sort((a, b) => a.year - b.year);
  if (entries.length === 0) {
    return svgShell(title, width, height, `<text class="label" x="${width / 2}" y="${height / 2}">no data</text>`);
  }
  const pad = { top: 36, right: 24, bottom: 30, left: 24 };
  const innerW = width - pad.left - pad.right;
  const innerH = height - pad.top - pad.bottom;
  const years = entries.map((p) => p.year);
  const minYear = Math.min(...years);
  const maxYear = Math.max(...years);
  const span = Math.max(1, maxYear - minYear);
  const max = Math.max(1, ...entries.map((p) => p.value));

  const toX = (year: number) =>
    entries.length === 1 ? pad.left + innerW / 2 : pad.left + ((year - minYear) / span) * innerW;
  const toY = (value: number) => pad.top + innerH - (value / max) * innerH;

  const points = entries.map((p) => `${toX(p.year).toFixed(1)},${toY(p.value).toFixed(1)}`).join(" ");
  let body = `<polyline class="series-line" points="${points}"></polyline>`;
  for (const p of entries) {
    const x = toX(p.year);
    const y = toY(p.value);
    body += `<circle class="series-point" data-key="${p.year}" data-value="${p.value}" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3.5"></circle>`;
    body += `<text class="value" x="${x.toFixed(1)}" y="${(y - 8).toFixed(1)}">${p.value}</text>`;
    body += `<text class="label" x="${x.toFixed(1)}" y="${height - 9}">${p.year}</text>`;
  }
  return svgShell(title, width, height, body);
}

/** Horizontal bar list (e.g. incidents per source), largest first. */
export function hbarListHtml(data: Record<string, number>): string {
  const entries = Object.entries(data).sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]));
  if (entries.length === 0) return `<p class="empty-state">no data</p>`;
  const max = Math.max(1, ...entries.map(([, v]) => v));
  const rows = entries
    .map(([label, value]) => {
      const pct = ((value / max) * 100).toFixed(1);
      return (
        `<li data-key="${esc(label)}" data-value="${value}">` +
        `<span class="hbar-label">${esc(label)}</span>` +
        `<span class="hbar-track"><span class="hbar-fill" style="width:${pct}%"></span></span>` +
        `<span class="hbar-value">${value}</span></li>`
      );
    })
    .join("");
  return `<ul class="hbar">${rows}</ul>`;
}
