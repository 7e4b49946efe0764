import { describe, expect, it } from "vitest";

import { computeRanks, layoutGraph } from "../src/layout.js";
import type { GraphDoc } from "../src/types.js";

function doc(nodes: number[], edges: Array<[number, number]>): GraphDoc {
  return {
    format_version: 1,
    library: { version: "test", hash: "x" },
    nodes: nodes.map((id) => ({ id, type: `op${id}`, params: [] })),
    edges: edges.map(([a, b]) => ({ from: [a, 0], to: [b, 0] })),
  };
}

describe("computeRanks", () => {
  it("assigns increasing ranks along a chain", () => {
    const ranks = computeRanks(doc([0, 1, 2], [[0, 1], [1, 2]]));
    expect(ranks.get(0)).toBe(0);
    expect(ranks.get(1)).toBe(1);
    expect(ranks.get(2)).toBe(2);
  });

  it("uses the longest path for reconverging branches", () => {
    // 0 -> 1 -> 3 and 0 -> 3 directly: 3 must sit after 1
    const ranks = computeRanks(doc([0, 1, 3], [[0, 1], [1, 3], [0, 3]]));
    expect(ranks.get(3)).toBe(2);
  });

  it("keeps disconnected roots at rank zero", () => {
    const ranks = computeRanks(doc([0, 1], []));
    expect(ranks.get(0)).toBe(0);
    expect(ranks.get(1)).toBe(0);
  });
});

describe("layoutGraph", () => {
  it("renders a three node chain as three columns", () => {
    const result = layoutGraph(doc([0, 1, 2], [[0, 1], [1, 2]]));
    expect(result.ranks).toBe(3);
    const xs = [0, 1, 2].map((id) => result.positions.get(id)!.x);
    expect(xs[0]).toBeLessThan(xs[1]);
    expect(xs[1]).toBeLessThan(xs[2]);
  });

  it("is deterministic", () => {
    const d = doc([0, 1, 2, 3, 4], [[0, 2], [1, 2], [2, 3], [2, 4]]);
    const a = layoutGraph(d);
    const b = layoutGraph(d);
    expect([...a.positions.entries()]).toEqual([...b.positions.entries()]);
  });

  it("orders rows by predecessor barycenter", () => {
    // parents 0 (row 0) and 1 (row 1); child 2 follows parent 0, child 3 follows parent 1
    const d = doc([0, 1, 2, 3], [[0, 2], [1, 3]]);
    const result = layoutGraph(d);
    expect(result.positions.get(2)!.row).toBeLessThan(result.positions.get(3)!.row);
  });
});
