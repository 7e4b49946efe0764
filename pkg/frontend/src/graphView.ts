// SVG rendering of one material graph: layered node boxes with slot
// anchors, curved edges, provenance coloring, and click-to-toggle
// selection. Pure projection of a GraphDoc; no state lives here.

import { COLUMN_WIDTH, NODE_HEIGHT, NODE_WIDTH, layoutGraph } from "./layout.js";
import type { GraphDoc, Provenance } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphViewOptions {
  provenance?: Record<string, Provenance>;
  selected?: Set<number>;
  onNodeClick?: (nodeId: number) => void;
}

function el<K extends keyof SVGElementTagNameMap>(tag: K, attrs: Record<string, string>): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function paramTitle(doc: GraphDoc, nodeId: number): string {
  const node = doc.nodes.find((n) => n.id === nodeId)!;
  if (node.params.length === 0) return node.type;
  const parts = node.params.map((p) => `${p.name}=[${p.values.map((v) => +v.toFixed(3)).join(", ")}]`);
  return `${node.type}\n${parts.join("\n")}`;
}

export function renderGraphView(doc: GraphDoc, options: GraphViewOptions = {}): SVGSVGElement {
  const { positions, ranks, rows } = layoutGraph(doc);
  const width = Math.max(ranks * COLUMN_WIDTH + 40, 200);
  const height = Math.max(rows * 64 + 40, 120);
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "graph-view",
  });

  const slotPoint = (nodeId: number, output: boolean, slot: number, slots: number): [number, number] => {
    const pos = positions.get(nodeId)!;
    const x = pos.x + (output ? NODE_WIDTH : 0);
    const step = NODE_HEIGHT / (slots + 1);
    return [x, pos.y + step * (slot + 1)];
  };

  const slotCounts = new Map<number, { ins: number; outs: number }>();
  for (const n of doc.nodes) slotCounts.set(n.id, { ins: 0, outs: 0 });
  for (const e of doc.edges) {
    const from = slotCounts.get(e.from[0])!;
    from.outs = Math.max(from.outs, e.from[1] + 1);
    const to = slotCounts.get(e.to[0])!;
    to.ins = Math.max(to.ins, e.to[1] + 1);
  }

  for (const e of doc.edges) {
    const counts_from = slotCounts.get(e.from[0])!;
    const counts_to = slotCounts.get(e.to[0])!;
    const [x1, y1] = slotPoint(e.from[0], true, e.from[1], Math.max(counts_from.outs, 1));
    const [x2, y2] = slotPoint(e.to[0], false, e.to[1], Math.max(counts_to.ins, 1));
    const mid = (x1 + x2) / 2;
    svg.appendChild(
      el("path", {
        d: `M ${x1} ${y1} C ${mid} ${y1}, ${mid} ${y2}, ${x2} ${y2}`,
        class: "edge",
        fill: "none",
      }),
    );
  }

  for (const node of doc.nodes) {
    const pos = positions.get(node.id)!;
    const provenance = options.provenance?.[String(node.id)] ?? "pinned";
    const selected = options.selected?.has(node.id) ?? false;
    const group = el("g", {
      class: `node ${provenance}${selected ? " selected" : ""}`,
      "data-node-id": String(node.id),
      "data-provenance": provenance,
      transform: `translate(${pos.x}, ${pos.y})`,
    });
    group.appendChild(el("rect", { width: String(NODE_WIDTH), height: String(NODE_HEIGHT), rx: "6" }));
    const label = el("text", { x: String(NODE_WIDTH / 2), y: String(NODE_HEIGHT / 2 + 4), "text-anchor": "middle" });
    label.textContent = node.type.length > 15 ? node.type.slice(0, 14) + "…" : node.type;
    group.appendChild(label);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = paramTitle(doc, node.id);
    group.appendChild(title);

    const counts = slotCounts.get(node.id)!;
    for (let s = 0; s < Math.max(counts.ins, 0); s++) {
      const step = NODE_HEIGHT / (Math.max(counts.ins, 1) + 1);
      group.appendChild(el("circle", { cx: "0", cy: String(step * (s + 1)), r: "3", class: "slot in" }));
    }
    for (let s = 0; s < Math.max(counts.outs, 1); s++) {
      const step = NODE_HEIGHT / (Math.max(counts.outs, 1) + 1);
      group.appendChild(el("circle", { cx: String(NODE_WIDTH), cy: String(step * (s + 1)), r: "3", class: "slot out" }));
    }

    if (options.onNodeClick) {
      group.addEventListener("click", () => options.onNodeClick!(node.id));
    }
    svg.appendChild(group);
  }
  return svg;
}
