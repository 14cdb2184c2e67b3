import { describe, expect, it } from "vitest";

import { barChartSvg, hbarListHtml, lineChartSvg } from "../src/charts.js";

function attrValues(markup: string, attr: string): number[] {
  return [...markup.matchAll(new RegExp(`${attr}="([-0-9.]+)"`, "g"))].map((m) => Number(m[1]));
}

describe("bar chart", () => {
  it("renders one labeled bar per category with verbatim values", () => {
    const svg = barChartSvg({ Aviation: 6, Maritime: 17 }, "Incidents by transportation mode");
    expect(svg.match(/<rect class="bar"/g)).toHaveLength(2);
    expect(svg).toContain('data-key="Aviation" data-value="6"');
    expect(svg).toContain('data-key="Maritime" data-value="17"');
    expect(svg).toContain(">Incidents by transportation mode</text>");
    expect(svg).toContain(">6</text>");
    expect(svg).toContain(">17</text>");
  });

  it("scales bar heights proportionally to values", () => {
    const svg = barChartSvg({ a: 5, b: 10 }, "t");
    const heights = [...svg.matchAll(/height="([0-9.]+)" rx/g)].map((m) => Number(m[1]));
    expect(heights).toHaveLength(2);
    expect(heights[1]! / heights[0]!).toBeCloseTo(2, 2);
  });

  it("escapes markup in category labels", () => {
    const svg = barChartSvg({ "<Evil&Mode>": 3 }, 'a "title" & more');
    expect(svg).toContain("&lt;Evil&amp;Mode&gt;");
    expect(svg).toContain("&quot;title&quot;");
    expect(svg).not.toContain("<Evil");
  });

  it("renders an explicit empty placeholder", () => {
    expect(barChartSvg({}, "t")).toContain("no data");
  });
});

describe("line chart", () => {
  it("plots one point per year on a shared polyline", () => {
    const svg = lineChartSvg({ "2019": 2, "2021": 5, "2023": 1 }, "Incidents per year");
    expect(svg.match(/<circle class="series-point"/g)).toHaveLength(3);
    const points = svg.match(/points="([^"]+)"/)![1]!.trim().split(" ");
    expect(points).toHaveLength(3);
  });

  it("keeps calendar gaps proportional on the x axis", () => {
    const svg = lineChartSvg({ "2019": 2, "2021": 5, "2023": 1 }, "t");
    const xs = attrValues(svg, "cx");
    expect(xs).toHaveLength(3);
    expect(xs[1]! - xs[0]!).toBeCloseTo(xs[2]! - xs[1]!, 1);
  });

  it("centers a single-year series without degenerate math", () => {
    const svg = lineChartSvg({ "2020": 4 }, "t");
    expect(svg).not.toContain("NaN");
    expect(svg.match(/<circle class="series-point"/g)).toHaveLength(1);
  });

  it("sorts years numerically regardless of object key order", () => {
    const svg = lineChartSvg({ "2023": 1, "2015": 3 }, "t");
    const labels = [...svg.matchAll(/<text class="label"[^>]*>(\d+)<\/text>/g)].map((m) => m[1]);
    expect(labels).toEqual(["2015", "2023"]);
  });
});

describe("source breakdown", () => {
  it("orders bars largest-first with verbatim counts", () => {
    const html = hbarListHtml({ umced: 8, mcad: 11, tracr: 3 });
    const keys = [...html.matchAll(/data-key="(\w+)"/g)].map((m) => m[1]);
    expect(keys).toEqual(["mcad", "umced", "tracr"]);
    expect(html).toContain('data-key="mcad" data-value="11"');
    expect(html).toContain("width:100.0%");
    expect(html).toContain(`width:${((8 / 11) * 100).toFixed(1)}%`);
  });

  it("renders an empty placeholder for no data", () => {
    expect(hbarListHtml({})).toContain("no data");
  });
});
