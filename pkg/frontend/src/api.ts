// Thin REST client for the authoring service. Every non-2xx response is
// surfaced as an ApiError carrying the HTTP status so the UI can
// distinguish validation problems (422) from conflicts (409).

import type { AcceptResponse, CompleteResponse, GraphDoc, LibraryDoc, SessionView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface CompleteParams {
  pinned_node_ids?: number[] | null;
  count?: number;
  temperature?: number;
  seed?: number;
  max_nodes?: number;
  thumbnails?: boolean;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class StudioApi {
  constructor(readonly base: string) {}

  library(): Promise<LibraryDoc> {
    return request(this.base, "/v1/library");
  }

  createSession(graph?: GraphDoc): Promise<SessionView> {
    return request(this.base, "/v1/sessions", {
      method: "POST",
      body: JSON.stringify(graph ? { graph } : {}),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.base, `/v1/sessions/${sessionId}`);
  }

  complete(sessionId: string, params: CompleteParams): Promise<CompleteResponse> {
    return request(this.base, `/v1/sessions/${sessionId}/complete`, {
      method: "POST",
      body: JSON.stringify(params),
    });
  }

  accept(sessionId: string, candidateIndex: number, keptNodeIds: number[]): Promise<AcceptResponse> {
    return request(this.base, `/v1/sessions/${sessionId}/accept`, {
      method: "POST",
      body: JSON.stringify({ candidate_index: candidateIndex, kept_node_ids: keptNodeIds }),
    });
  }
}
