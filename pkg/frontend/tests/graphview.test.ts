import { describe, expect, it } from "vitest";

import { renderGraphView } from "../src/graphView.js";
import type { GraphDoc, Provenance } from "../src/types.js";

function chainDoc(): GraphDoc {
  return {
    format_version: 1,
    library: { version: "t", hash: "h" },
    nodes: [
      { id: 0, type: "checker", params: [{ name: "tiles", values: [4] }] },
      { id: 1, type: "invert", params: [] },
      { id: 2, type: "output_albedo", params: [] },
    ],
    edges: [
      { from: [0, 0], to: [1, 0] },
      { from: [1, 0], to: [2, 0] },
    ],
  };
}

describe("renderGraphView", () => {
  it("renders a three node chain across three columns left to right", () => {
    const svg = renderGraphView(chainDoc());
    const groups = [...svg.querySelectorAll("g.node")];
    expect(groups).toHaveLength(3);
    const xOf = (id: number) => {
      const g = svg.querySelector(`g[data-node-id="${id}"]`)!;
      return Number(/translate\((\d+(?:\.\d+)?),/.exec(g.getAttribute("transform")!)![1]);
    };
    expect(xOf(0)).toBeLessThan(xOf(1));
    expect(xOf(1)).toBeLessThan(xOf(2));
  });

  it("tags nodes with their provenance class", () => {
    const provenance: Record<string, Provenance> = { "0": "pinned", "1": "generated", "2": "generated" };
    const svg = renderGraphView(chainDoc(), { provenance });
    expect(svg.querySelector('g[data-node-id="0"]')!.classList.contains("pinned")).toBe(true);
    expect(svg.querySelector('g[data-node-id="1"]')!.classList.contains("generated")).toBe(true);
  });

  it("marks selected nodes and fires click callbacks", () => {
    const clicks: number[] = [];
    const svg = renderGraphView(chainDoc(), {
      selected: new Set([1]),
      onNodeClick: (id) => clicks.push(id),
    });
    document.body.appendChild(svg);
    expect(svg.querySelector('g[data-node-id="1"]')!.classList.contains("selected")).toBe(true);
    (svg.querySelector('g[data-node-id="2"]') as SVGGElement).dispatchEvent(
      new MouseEvent("click", { bubbles: true }),
    );
    expect(clicks).toEqual([2]);
    svg.remove();
  });

  it("draws one edge path per edge and slot anchors per node", () => {
    const svg = renderGraphView(chainDoc());
    expect(svg.querySelectorAll("path.edge")).toHaveLength(2);
    expect(svg.querySelectorAll('g[data-node-id="1"] circle.slot').length).toBeGreaterThanOrEqual(2);
  });

  it("exposes parameters through the hover title", () => {
    const svg = renderGraphView(chainDoc());
    const title = svg.querySelector('g[data-node-id="0"] title')!;
    expect(title.textContent).toContain("checker");
    expect(title.textContent).toContain("tiles");
  });
});
