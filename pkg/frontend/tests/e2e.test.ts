// End-to-end round trip against a live service: create a session, request
// three completions, accept a kept-node subset, reload, and verify the
// working graph equals the induced subgraph. Runs the real app code under
// jsdom with real fetch; the service is a spawned uvicorn process.

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { StudioApi } from "../src/api.js";
import { mountApp } from "../src/main.js";
import type { GraphDoc } from "../src/types.js";

let proc: ChildProcess;
let base = "";

function inducedSubgraph(doc: GraphDoc, kept: number[]): GraphDoc {
  const keep = new Set(kept);
  return {
    ...doc,
    nodes: doc.nodes.filter((n) => keep.has(n.id)),
    edges: doc.edges.filter((e) => keep.has(e.from[0]) && keep.has(e.to[0])),
  };
}

function canonical(doc: GraphDoc): string {
  const nodes = [...doc.nodes].sort((a, b) => a.id - b.id);
  const edges = [...doc.edges].sort(
    (a, b) => a.to[0] - b.to[0] || a.to[1] - b.to[1] || a.from[0] - b.from[0] || a.from[1] - b.from[1],
  );
  return JSON.stringify({ nodes, edges });
}

beforeAll(async () => {
  const here = dirname(fileURLToPath(import.meta.url));
  const dataDir = mkdtempSync(join(tmpdir(), "matgen-e2e-"));
  proc = spawn("python3", [join(here, "serve_fixture.py"), dataDir], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  base = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("service did not start")), 60_000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      const match = /PORT (\d+)/.exec(chunk.toString());
      if (match) {
        clearTimeout(timer);
        resolve(`http://127.0.0.1:${match[1]}`);
      }
    });
    proc.on("exit", (code) => reject(new Error(`service exited early (${code})`)));
  });
  // wait until the app answers
  for (let i = 0; i < 100; i++) {
    try {
      const resp = await fetch(`${base}/v1/library`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service never became ready");
}, 90_000);

afterAll(() => {
  proc?.kill("SIGTERM");
});

describe("UI round trip against a live service", () => {
  it("create, complete three, accept a subset, reload", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const store = mountApp(root, base);

    await store.createSession();
    expect(store.current.sessionId).toBeTruthy();

    await store.requestCompletions({ count: 3, temperature: 1.0, seed: 7, max_nodes: 8 });
    expect(store.current.gallery?.candidates).toHaveLength(3);

    // the gallery is rendered in the DOM
    expect(root.querySelectorAll(".candidate-card")).toHaveLength(3);

    store.chooseCandidate(1);
    const candidate = store.current.gallery!.candidates[1];
    const allIds = candidate.graph.nodes.map((n) => n.id);
    // discard the last generated node (if any were generated)
    const generated = allIds.filter((id) => candidate.provenance[String(id)] === "generated");
    for (const id of generated.slice(Math.max(generated.length - 1, 0))) {
      store.toggleKept(id);
    }
    const kept = [...store.current.gallery!.keptNodeIds].sort((a, b) => a - b);
    const expected = canonical(inducedSubgraph(candidate.graph, kept));

    await store.acceptChosen();
    expect(store.current.error).toBeNull();
    expect(canonical(store.current.workingGraph!)).toBe(expected);

    // a page reload is a fresh store hitting the same session
    const fresh = new StudioApi(base);
    const view = await fresh.getSession(store.current.sessionId!);
    expect(canonical(view.graph)).toBe(expected);
    root.remove();
  });

  it("pinned nodes are visually tagged in every candidate", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const store = mountApp(root, base);
    const api = new StudioApi(base);

    // seed a session whose graph has two nodes, then complete
    const seeded = await api.createSession();
    await store.loadSession(seeded.session_id);
    await store.requestCompletions({ count: 2, temperature: 1.0, seed: 3, max_nodes: 6 });
    store.chooseCandidate(0);
    const chosenPanel = root.querySelector("#chosen-graph")!;
    const pinnedNodes = chosenPanel.querySelectorAll('g.node[data-provenance="pinned"]');
    const generatedNodes = chosenPanel.querySelectorAll('g.node[data-provenance="generated"]');
    expect(pinnedNodes.length + generatedNodes.length).toBe(
      store.current.gallery!.candidates[0].graph.nodes.length,
    );
    root.remove();
  });

  it("two racing accepts resolve as one success and one conflict", async () => {
    const api = new StudioApi(base);
    const session = await api.createSession();
    const completion = await api.complete(session.session_id, {
      count: 2,
      temperature: 1.0,
      seed: 5,
      max_nodes: 6,
      thumbnails: false,
    });
    const kept = completion.candidates[0].graph.nodes.map((n) => n.id);
    const results = await Promise.allSettled([
      api.accept(session.session_id, 0, kept),
      api.accept(session.session_id, 0, kept),
    ]);
    const statuses = results.map((r) =>
      r.status === "fulfilled" ? 200 : (r.reason as { status?: number }).status ?? 0,
    );
    expect(statuses.sort()).toEqual([200, 409]);

    // state is intact: the session still answers with a valid graph
    const after = await api.getSession(session.session_id);
    expect(after.revision).toBe(1);
  });
});
