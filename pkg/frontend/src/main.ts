// Application bootstrap: wires the store to the DOM. The working graph
// panel shows the session's pinned-editable graph; the gallery shows
// completion candidates; the chosen candidate opens a kept-node editor.

import { StudioApi } from "./api.js";
import { renderGallery } from "./gallery.js";
import { renderGraphView } from "./graphView.js";
import { StudioStore, type StudioState } from "./state.js";
import { MATERIAL_CHANNELS, type Channel } from "./types.js";

export function mountApp(root: HTMLElement, apiBase: string): StudioStore {
  const api = new StudioApi(apiBase);
  const store = new StudioStore(api);
  let channel: Channel = "albedo";

  root.innerHTML = `
    <header>
      <h1>Material Graph Studio</h1>
      <div class="controls">
        <button id="new-session">New session</button>
        <span id="session-label" class="session-label"></span>
        <label>count <select id="count">${[1, 2, 3, 4, 6].map((n) => `<option${n === 3 ? " selected" : ""}>${n}</option>`).join("")}</select></label>
        <label>temperature <input id="temperature" type="range" min="0" max="2" step="0.1" value="1.0" />
          <span id="temperature-value">1.0</span></label>
        <label>channel <select id="channel">${MATERIAL_CHANNELS.map((c) => `<option>${c}</option>`).join("")}</select></label>
        <button id="complete" disabled>Suggest completions</button>
      </div>
    </header>
    <div id="banner" class="banner hidden"></div>
    <main>
      <section class="panel">
        <h2>Working graph <small>(click nodes to pin / unpin for the next round)</small></h2>
        <div id="working-graph" class="graph-panel"></div>
      </section>
      <section class="panel">
        <h2>Completions</h2>
        <div id="gallery" class="gallery"></div>
        <div id="kept-editor" class="hidden">
          <h3>Kept nodes <small>(click to keep / discard, then accept)</small></h3>
          <div id="chosen-graph" class="graph-panel"></div>
          <button id="accept">Accept kept nodes</button>
        </div>
      </section>
    </main>
  `;

  const $ = <T extends HTMLElement>(sel: string): T => root.querySelector(sel) as T;
  const banner = $("#banner");
  const workingPanel = $("#working-graph");
  const galleryPanel = $("#gallery");
  const keptEditor = $("#kept-editor");
  const chosenPanel = $("#chosen-graph");
  const completeBtn = $("#complete") as unknown as HTMLButtonElement;
  const acceptBtn = $("#accept") as unknown as HTMLButtonElement;
  const tempInput = $("#temperature") as unknown as HTMLInputElement;

  tempInput.addEventListener("input", () => {
    $("#temperature-value").textContent = tempInput.value;
  });

  $("#new-session").addEventListener("click", () => void store.createSession());
  $("#channel").addEventListener("change", (ev) => {
    channel = (ev.target as HTMLSelectElement).value as Channel;
    render(store.current);
  });
  completeBtn.addEventListener("click", () => {
    void store.requestCompletions({
      count: Number(($("#count") as unknown as HTMLSelectElement).value),
      temperature: Number(tempInput.value),
      seed: Math.floor(Math.random() * 1_000_000),
    });
  });
  acceptBtn.addEventListener("click", () => void store.acceptChosen());

  function render(state: StudioState): void {
    $("#session-label").textContent = state.sessionId ? `session ${state.sessionId} · rev ${state.revision}` : "no session";
    completeBtn.disabled = !state.sessionId || state.busy;
    banner.classList.toggle("hidden", !state.error && !state.notice);
    banner.classList.toggle("error", Boolean(state.error));
    banner.textContent = state.error ?? state.notice ?? "";

    workingPanel.replaceChildren();
    if (state.workingGraph) {
      const provenance: Record<string, "pinned" | "generated"> = {};
      for (const n of state.workingGraph.nodes) {
        provenance[String(n.id)] = state.pinned.has(n.id) ? "pinned" : "generated";
      }
      workingPanel.appendChild(
        renderGraphView(state.workingGraph, {
          provenance,
          selected: state.pinned,
          onNodeClick: (id) => store.togglePin(id),
        }),
      );
    }

    if (state.gallery) {
      renderGallery(galleryPanel, state.gallery.candidates, state.gallery.chosenIndex, channel, {
        onChoose: (index) => store.chooseCandidate(index),
      });
      const chosen = state.gallery.chosenIndex;
      keptEditor.classList.toggle("hidden", chosen === null);
      chosenPanel.replaceChildren();
      if (chosen !== null) {
        const candidate = state.gallery.candidates[chosen];
        chosenPanel.appendChild(
          renderGraphView(candidate.graph, {
            provenance: candidate.provenance,
            selected: state.gallery.keptNodeIds,
            onNodeClick: (id) => store.toggleKept(id),
          }),
        );
        acceptBtn.disabled = state.busy;
      }
    } else {
      galleryPanel.replaceChildren();
      keptEditor.classList.add("hidden");
    }
  }

  store.subscribe(render);
  render(store.current);
  return store;
}

declare global {
  interface Window {
    __matgenStore?: StudioStore;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const base = (document.getElementById("app") as HTMLElement).dataset.apiBase ?? "";
  window.__matgenStore = mountApp(document.getElementById("app") as HTMLElement, base);
}
