// Console state and reducers, kept free of DOM and socket concerns so
// the behavior is unit-testable. The view renders whatever is in here;
// the client feeds frames in and takes outbound frames away.

import {
  Frame,
  HelloPayload,
  OutboundFrame,
  StateSnapshot,
  behaviorFrame,
  schemaSupported,
  sessionFrame,
} from "./protocol.js";

export const LOG_LIMIT = 200;

export type Connection = "connecting" | "connected" | "closed";

export interface LogEntry {
  t: number; // session clock ms
  text: string;
  origin?: string;
}

export interface ConsoleModel {
  connection: Connection;
  scenario: string;
  labels: string[];
  categories: Record<string, string[]>;
  state: StateSnapshot | null;
  log: LogEntry[];
  banner: string | null;
  flash: string | null; // label of the most recently acknowledged button
  queueWhenDisconnected: boolean;
  queued: OutboundFrame[];
  droppedClicks: number;
}

export function initialModel(): ConsoleModel {
  return {
    connection: "connecting",
    scenario: "",
    labels: [],
    categories: {},
    state: null,
    log: [],
    banner: null,
    flash: null,
    queueWhenDisconnected: true,
    queued: [],
    droppedClicks: 0,
  };
}

function pushLog(model: ConsoleModel, entry: LogEntry): void {
  model.log.push(entry);
  if (model.log.length > LOG_LIMIT) {
    model.log.splice(0, model.log.length - LOG_LIMIT);
  }
}

export function onOpen(model: ConsoleModel): OutboundFrame[] {
  model.connection = "connected";
  model.banner = null;
  const flush = model.queued;
  model.queued = [];
  return flush;
}

export function onClose(model: ConsoleModel): void {
  model.connection = "closed";
  model.banner = "connection lost";
}

export function onFrame(model: ConsoleModel, frame: Frame): void {
  switch (frame.kind) {
    case "hello": {
      const hello = frame.payload as HelloPayload;
      if (!schemaSupported(hello.schema)) {
        model.banner = `gateway schema v${hello.schema} is not supported by this console`;
        return;
      }
      model.scenario = hello.scenario;
      model.labels = hello.labels;
      model.categories = hello.categories;
      pushLog(model, { t: 0, text: `connected to session "${hello.scenario}"` });
      return;
    }
    case "event":
      onEvent(model, frame.topic, frame.payload);
      return;
    case "ack":
      if ("label" in frame.payload) {
        model.flash = String(frame.payload.label);
      }
      return;
    case "error":
      model.banner = `${frame.payload.code}: ${frame.payload.message}`;
      return;
  }
}

function onEvent(model: ConsoleModel, topic: string, record: Frame extends never ? never : any): void {
  const payload = record.payload ?? {};
  if (topic === "dm.state") {
    // Last write wins; bursts collapse to the newest snapshot.
    model.state = payload.state as StateSnapshot;
    return;
  }
  if (topic === "perception.behavior") {
    pushLog(model, {
      t: record.t,
      text: `baby ${payload.label}`,
      origin: payload.origin,
    });
    return;
  }
  if (topic.startsWith("agent.")) {
    const reason = payload.reason ? ` (${payload.reason})` : "";
    pushLog(model, {
      t: record.t,
      text: `${payload.agent} ${String(payload.phase).toLowerCase()} ${payload.behavior}${reason}`,
    });
  }
}

/**
 * A behavior button click. Returns the frames to put on the wire now;
 * when disconnected the click is queued or dropped per the user setting,
 * and the situation is surfaced on the banner either way.
 */
export function clickBehavior(model: ConsoleModel, label: string): OutboundFrame[] {
  if (!model.labels.includes(label)) {
    model.banner = `unknown behavior label ${label}`;
    return [];
  }
  const frame = behaviorFrame(label);
  if (model.connection !== "connected") {
    if (model.queueWhenDisconnected) {
      model.queued.push(frame);
      model.banner = `disconnected — ${model.queued.length} click(s) queued`;
    } else {
      model.droppedClicks += 1;
      model.banner = `disconnected — click discarded (${model.droppedClicks} total)`;
    }
    return [];
  }
  return [frame];
}

export function toggleParent(model: ConsoleModel, joined: boolean): OutboundFrame[] {
  if (model.connection !== "connected") {
    model.banner = "disconnected — parent toggle not sent";
    return [];
  }
  return [sessionFrame(joined)];
}

/** The button grid is usable only once the hello frame arrived. */
export function buttonsEnabled(model: ConsoleModel): boolean {
  return model.connection === "connected" && model.labels.length > 0;
}
