// Deterministic layered layout for DAG rendering: rank = longest path
// from any root, so generators sit in the left column and output markers
// drift right. Rows within a rank are ordered by the mean row of their
// predecessors (barycenter), ties by node id.

import type { GraphDoc } from "./types.js";

export interface NodePosition {
  id: number;
  rank: number;
  row: number;
  x: number;
  y: number;
}

export interface LayoutResult {
  positions: Map<number, NodePosition>;
  ranks: number; // number of columns
  rows: number; // tallest column
}

export const COLUMN_WIDTH = 150;
export const ROW_HEIGHT = 64;
export const NODE_WIDTH = 110;
export const NODE_HEIGHT = 40;

export function computeRanks(doc: GraphDoc): Map<number, number> {
  const ids = doc.nodes.map((n) => n.id);
  const indegree = new Map<number, number>(ids.map((id) => [id, 0]));
  const successors = new Map<number, number[]>(ids.map((id) => [id, []]));
  for (const e of doc.edges) {
    indegree.set(e.to[0], (indegree.get(e.to[0]) ?? 0) + 1);
    successors.get(e.from[0])?.push(e.to[0]);
  }
  const rank = new Map<number, number>(ids.map((id) => [id, 0]));
  const queue = ids.filter((id) => (indegree.get(id) ?? 0) === 0).sort((a, b) => a - b);
  const pending = new Map(indegree);
  while (queue.length > 0) {
    const id = queue.shift()!;
    for (const next of successors.get(id) ?? []) {
      rank.set(next, Math.max(rank.get(next) ?? 0, (rank.get(id) ?? 0) + 1));
      pending.set(next, (pending.get(next) ?? 0) - 1);
      if (pending.get(next) === 0) queue.push(next);
    }
  }
  return rank;
}

export function layoutGraph(doc: GraphDoc): LayoutResult {
  const rank = computeRanks(doc);
  const predecessors = new Map<number, number[]>(doc.nodes.map((n) => [n.id, []]));
  for (const e of doc.edges) predecessors.get(e.to[0])?.push(e.from[0]);

  const columns = new Map<number, number[]>();
  for (const n of doc.nodes) {
    const r = rank.get(n.id) ?? 0;
    if (!columns.has(r)) columns.set(r, []);
    columns.get(r)!.push(n.id);
  }

  const positions = new Map<number, NodePosition>();
  let maxRows = 0;
  const sortedRanks = [...columns.keys()].sort((a, b) => a - b);
  for (const r of sortedRanks) {
    const ids = columns.get(r)!;
    const score = (id: number): number => {
      const preds = predecessors.get(id) ?? [];
      const rows = preds
        .map((p) => positions.get(p)?.row)
        .filter((v): v is number => v !== undefined);
      return rows.length > 0 ? rows.reduce((a, b) => a + b, 0) / rows.length : id;
    };
    ids.sort((a, b) => score(a) - score(b) || a - b);
    ids.forEach((id, row) => {
      positions.set(id, {
        id,
        rank: r,
        row,
        x: r * COLUMN_WIDTH + 20,
        y: row * ROW_HEIGHT + 20,
      });
    });
    maxRows = Math.max(maxRows, ids.length);
  }
  return { positions, ranks: sortedRanks.length, rows: maxRows };
}
