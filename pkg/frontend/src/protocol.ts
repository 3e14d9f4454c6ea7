// Gateway frame protocol: one JSON text frame per WebSocket message.
// Shape: {v, kind, topic?, payload}; see the repository README for the
// field-by-field description.

export const PROTOCOL_VERSION = 1;

export interface AgentView {
  status: string;
  behavior: string;
}

export interface PlanView {
  id: string;
  provenance: string;
  episode: string;
  rhyme: string;
  cursor: number;
  steps: { agent: string; behavior: string; target: string }[];
  terminal: boolean[];
}

export interface RhymeUnit {
  rhyme: string;
  index: number;
  total: number;
  gloss: string;
  prime: string;
}

export interface StateSnapshot {
  clock: number;
  aoi: string;
  fixated: boolean;
  readiness: string;
  rhyme_unit: RhymeUnit | null;
  last_behavior: { t: number; label: string; category: string; origin: string } | null;
  behavior_pending: boolean;
  avatar: AgentView;
  robot: AgentView;
  active_plan: PlanView | null;
  episode: string;
  episode_rhyme: string;
  parent_joined: boolean;
  timers: { id: string; kind: string; fire_at: number }[];
  rhyme_rotation: number;
}

export interface EventRecord {
  t: number;
  seq: number;
  source: string;
  payload: Record<string, unknown> & { kind: string };
}

export interface HelloPayload {
  schema: number;
  scenario: string;
  labels: string[];
  categories: Record<string, string[]>;
}

export type Frame =
  | { v: number; kind: "hello"; payload: HelloPayload }
  | { v: number; kind: "event"; topic: string; payload: EventRecord }
  | { v: number; kind: "ack"; payload: Record<string, unknown> }
  | { v: number; kind: "error"; payload: { code: string; message: string } };

export type OutboundFrame =
  | { v: number; kind: "behavior"; payload: { label: string } }
  | { v: number; kind: "session"; payload: { parent_joined: boolean } };

export function behaviorFrame(label: string): OutboundFrame {
  return { v: PROTOCOL_VERSION, kind: "behavior", payload: { label } };
}

export function sessionFrame(parentJoined: boolean): OutboundFrame {
  return { v: PROTOCOL_VERSION, kind: "session", payload: { parent_joined: parentJoined } };
}

export function encode(frame: OutboundFrame): string {
  return JSON.stringify(frame);
}

/** Parse one inbound frame; null when it is not a usable frame. */
export function parseFrame(raw: string): Frame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  if (typeof frame.kind !== "string" || typeof frame.v !== "number") return null;
  switch (frame.kind) {
    case "hello": {
      const p = frame.payload as HelloPayload | undefined;
      if (!p || !Array.isArray(p.labels) || typeof p.categories !== "object") return null;
      return frame as Frame;
    }
    case "event":
      if (typeof frame.topic !== "string") return null;
      return frame as Frame;
    case "ack":
    case "error":
      return frame as Frame;
    default:
      return null;
  }
}

/** Schema compatibility: the console understands protocol v1 only. */
export function schemaSupported(helloSchema: number): boolean {
  return helloSchema === PROTOCOL_VERSION;
}
