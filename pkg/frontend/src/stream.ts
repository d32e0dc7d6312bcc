/** Websocket stream client: JSON state/events, binary PNG frames,
 * automatic reconnect with exponential backoff. */

import { ServiceState, StreamEvent } from "./model.js";

export interface WsLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  binaryType?: string;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export interface StreamHandlers {
  onState?: (state: ServiceState) => void;
  onEvent?: (event: StreamEvent) => void;
  onFrame?: (frame: Blob) => void;
  onStatus?: (status: "connected" | "reconnecting" | "closed") => void;
}

export interface StreamOptions {
  wsFactory?: WsFactory;
  minBackoffMs?: number;
  maxBackoffMs?: number;
}

export interface StreamCounters {
  frames: number;
  events: number;
  reconnects: number;
}

const defaultFactory: WsFactory = (url) => new WebSocket(url) as unknown as WsLike;

export class StreamClient {
  readonly counters: StreamCounters = { frames: 0, events: 0, reconnects: 0 };

  private ws: WsLike | null = null;
  private backoffMs: number;
  private readonly minBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly wsFactory: WsFactory;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    options: StreamOptions = {},
  ) {
    this.wsFactory = options.wsFactory ?? defaultFactory;
    this.minBackoffMs = options.minBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.backoffMs = this.minBackoffMs;
  }

  connect(): void {
    if (this.closed) return;
    const ws = this.wsFactory(this.url);
    this.ws = ws;
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.backoffMs = this.minBackoffMs;
      this.handlers.onStatus?.("connected");
    };
    ws.onmessage = (ev) => this.dispatch(ev.data);
    ws.onerror = () => {
      // the close handler owns reconnection
    };
    ws.onclose = () => {
      if (this.closed) return;
      this.handlers.onStatus?.("reconnecting");
      this.scheduleReconnect();
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.ws?.close();
    this.handlers.onStatus?.("closed");
  }

  private scheduleReconnect(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.counters.reconnects += 1;
      this.connect();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
  }

  private dispatch(data: unknown): void {
    if (typeof data === "string") {
      this.counters.events += 1;
      const parsed = JSON.parse(data) as StreamEvent;
      if (parsed.type === "state") {
        this.handlers.onState?.(parsed as unknown as ServiceState & StreamEvent);
      } else {
        this.handlers.onEvent?.(parsed);
      }
      return;
    }
    this.counters.frames += 1;
    const blob =
      data instanceof Blob ? data : new Blob([data as ArrayBuffer], { type: "image/png" });
    this.handlers.onFrame?.(blob);
  }
}
