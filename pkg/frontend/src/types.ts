// Wire types mirroring the service's JSON payloads. The service owns all
// graph state; the client never mutates graphs locally.

export interface GraphParam {
  name: string;
  values: number[];
}

export interface GraphNode {
  id: number;
  type: string;
  params: GraphParam[];
}

export interface GraphEdge {
  from: [number, number]; // node id, output slot
  to: [number, number]; // node id, input slot
}

export interface GraphDoc {
  format_version: number;
  library: { version: string; hash: string };
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type Provenance = "pinned" | "generated";

export interface Candidate {
  graph: GraphDoc;
  provenance: Record<string, Provenance>;
  thumbnails?: Record<string, string>; // channel -> base64 PNG
}

export interface SessionView {
  session_id: string;
  revision: number;
  graph: GraphDoc;
  history: unknown[];
  has_pending_round: boolean;
}

export interface CompleteResponse {
  revision: number;
  candidates: Candidate[];
}

export interface AcceptResponse {
  revision: number;
  graph: GraphDoc;
}

export interface OperatorInfo {
  id: number;
  name: string;
  input_slots: number;
  output_slots: number;
  is_generator: boolean;
  is_output_marker: boolean;
}

export interface LibraryDoc {
  version: string;
  hash: string;
  operators: OperatorInfo[];
}

export const MATERIAL_CHANNELS = ["albedo", "normal", "roughness", "height", "metallic"] as const;
export type Channel = (typeof MATERIAL_CHANNELS)[number];
