// Client session state. The service is authoritative for graphs; this
// module only tracks which session we are in, the latest gallery, and the
// user's selections. At most one completion request is in flight per
// session; responses from superseded requests are dropped.

import { ApiError, StudioApi, type CompleteParams } from "./api.js";
import type { Candidate, GraphDoc, SessionView } from "./types.js";

export interface GalleryState {
  candidates: Candidate[];
  chosenIndex: number | null;
  keptNodeIds: Set<number>;
}

export interface StudioState {
  sessionId: string | null;
  revision: number;
  workingGraph: GraphDoc | null;
  pinned: Set<number>;
  gallery: GalleryState | null;
  busy: boolean;
  error: string | null;
  notice: string | null;
}

export type Listener = (state: StudioState) => void;

export class StudioStore {
  private state: StudioState = {
    sessionId: null,
    revision: 0,
    workingGraph: null,
    pinned: new Set(),
    gallery: null,
    busy: false,
    error: null,
    notice: null,
  };
  private listeners: Listener[] = [];
  private requestCounter = 0;

  constructor(readonly api: StudioApi) {}

  get current(): StudioState {
    return this.state;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private update(patch: Partial<StudioState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  private applySession(view: SessionView): void {
    this.requestCounter += 1; // outstanding completion responses are now stale
    this.update({
      sessionId: view.session_id,
      revision: view.revision,
      workingGraph: view.graph,
      pinned: new Set(view.graph.nodes.map((n) => n.id)),
      busy: false,
      error: null,
    });
  }

  async createSession(graph?: GraphDoc): Promise<void> {
    const view = await this.api.createSession(graph);
    this.applySession(view);
    this.update({ gallery: null, notice: null });
  }

  async loadSession(sessionId: string): Promise<void> {
    const view = await this.api.getSession(sessionId);
    this.applySession(view);
    this.update({ gallery: null });
  }

  togglePin(nodeId: number): void {
    if (!this.state.workingGraph) return;
    if (!this.state.workingGraph.nodes.some((n) => n.id === nodeId)) return;
    const pinned = new Set(this.state.pinned);
    if (pinned.has(nodeId)) pinned.delete(nodeId);
    else pinned.add(nodeId);
    this.update({ pinned });
  }

  async requestCompletions(params: CompleteParams): Promise<void> {
    if (!this.state.sessionId || this.state.busy) return;
    const requestId = ++this.requestCounter;
    this.update({ busy: true, error: null });
    try {
      const resp = await this.api.complete(this.state.sessionId, {
        ...params,
        pinned_node_ids: [...this.state.pinned].sort((a, b) => a - b),
      });
      if (requestId !== this.requestCounter) return; // superseded
      this.update({
        busy: false,
        revision: resp.revision,
        gallery: { candidates: resp.candidates, chosenIndex: null, keptNodeIds: new Set() },
      });
    } catch (err) {
      if (requestId !== this.requestCounter) return;
      this.update({ busy: false, error: errorText(err), gallery: this.state.gallery });
    }
  }

  chooseCandidate(index: number): void {
    const gallery = this.state.gallery;
    if (!gallery || index < 0 || index >= gallery.candidates.length) return;
    // keeping everything is the common path; start from the full node set
    const kept = new Set(gallery.candidates[index].graph.nodes.map((n) => n.id));
    this.update({ gallery: { ...gallery, chosenIndex: index, keptNodeIds: kept } });
  }

  toggleKept(nodeId: number): void {
    const gallery = this.state.gallery;
    if (!gallery || gallery.chosenIndex === null) return;
    const candidate = gallery.candidates[gallery.chosenIndex];
    if (!candidate.graph.nodes.some((n) => n.id === nodeId)) return; // kept set stays inside the candidate
    const kept = new Set(gallery.keptNodeIds);
    if (kept.has(nodeId)) kept.delete(nodeId);
    else kept.add(nodeId);
    this.update({ gallery: { ...gallery, keptNodeIds: kept } });
  }

  async acceptChosen(): Promise<void> {
    const { sessionId, gallery } = this.state;
    if (!sessionId || !gallery || gallery.chosenIndex === null || this.state.busy) return;
    this.update({ busy: true, error: null });
    try {
      const resp = await this.api.accept(sessionId, gallery.chosenIndex, [...gallery.keptNodeIds].sort((a, b) => a - b));
      this.update({
        busy: false,
        revision: resp.revision,
        workingGraph: resp.graph,
        pinned: new Set(resp.graph.nodes.map((n) => n.id)),
        gallery: null,
        notice: null,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else advanced the session; re-sync and tell the user
        const view = await this.api.getSession(sessionId);
        this.applySession(view);
        this.update({
          busy: false,
          gallery: null,
          notice: "The session advanced elsewhere; reloaded the latest graph.",
        });
        return;
      }
      this.update({ busy: false, error: errorText(err) });
    }
  }
}

export function errorText(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
