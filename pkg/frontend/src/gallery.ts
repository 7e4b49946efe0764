// Completion gallery: one card per candidate with channel thumbnails and
// a mini graph preview. The chosen candidate gets a kept-node editor.

import { renderGraphView } from "./graphView.js";
import type { Candidate, Channel } from "./types.js";

export interface GalleryCallbacks {
  onChoose: (index: number) => void;
}

export function renderGallery(
  root: HTMLElement,
  candidates: Candidate[],
  chosenIndex: number | null,
  channel: Channel,
  callbacks: GalleryCallbacks,
): void {
  root.replaceChildren();
  candidates.forEach((candidate, index) => {
    const card = document.createElement("div");
    card.className = "candidate-card" + (index === chosenIndex ? " chosen" : "");
    card.dataset.candidateIndex = String(index);

    if (candidate.thumbnails && candidate.thumbnails[channel]) {
      const img = document.createElement("img");
      img.className = "thumb";
      img.alt = `${channel} preview of candidate ${index}`;
      img.src = `data:image/png;base64,${candidate.thumbnails[channel]}`;
      card.appendChild(img);
    }

    const preview = renderGraphView(candidate.graph, { provenance: candidate.provenance });
    preview.classList.add("mini");
    card.appendChild(preview);

    const meta = document.createElement("div");
    meta.className = "card-meta";
    const generated = Object.values(candidate.provenance).filter((p) => p === "generated").length;
    meta.textContent = `${candidate.graph.nodes.length} nodes (${generated} new)`;
    card.appendChild(meta);

    const choose = document.createElement("button");
    choose.textContent = index === chosenIndex ? "Chosen" : "Choose";
    choose.className = "choose-btn";
    choose.addEventListener("click", () => callbacks.onChoose(index));
    card.appendChild(choose);

    root.appendChild(card);
  });
}
