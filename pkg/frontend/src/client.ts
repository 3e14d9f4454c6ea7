// Thin socket wrapper: the console only ever sees parsed frames and a
// connection status. The socket is injected so tests can drive the
// client without a network.

import { Frame, OutboundFrame, encode, parseFrame } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
}

export interface ClientHandlers {
  onOpen(): void;
  onFrame(frame: Frame): void;
  onClose(): void;
  /** Inbound data that failed to parse as a frame. */
  onGarbage?(raw: string): void;
}

export class GatewayClient {
  private socket: SocketLike | null = null;

  constructor(
    private readonly factory: () => SocketLike,
    private readonly handlers: ClientHandlers,
  ) {}

  connect(): void {
    const socket = this.factory();
    this.socket = socket;
    socket.onopen = () => this.handlers.onOpen();
    socket.onclose = () => this.handlers.onClose();
    socket.onmessage = (ev) => {
      const raw = typeof ev.data === "string" ? ev.data : String(ev.data);
      const frame = parseFrame(raw);
      if (frame) {
        this.handlers.onFrame(frame);
      } else {
        this.handlers.onGarbage?.(raw);
      }
    };
  }

  send(frame: OutboundFrame): void {
    if (!this.socket) throw new Error("not connected");
    this.socket.send(encode(frame));
  }

  sendAll(frames: OutboundFrame[]): void {
    for (const frame of frames) this.send(frame);
  }

  close(): void {
    this.socket?.close();
  }
}
