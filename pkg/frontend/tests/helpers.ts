/** Shared fakes: scripted websocket and an in-memory service double. */

import { FetchLike, SamplePayload } from "../src/api";
import { ServiceState, TfState } from "../src/model";
import { WsFactory, WsLike } from "../src/stream";

/** Settle promise chains and queued microtasks (a few macrotask turns). */
export async function flushAll(turns = 4): Promise<void> {
  for (let i = 0; i < turns; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function pointer(
  type: string,
  x: number,
  y: number,
  opts: { shiftKey?: boolean } = {},
): MouseEvent {
  // jsdom has no PointerEvent constructor; a MouseEvent with the pointer
  // type name reaches the same listeners
  return new MouseEvent(type, {
    bubbles: true,
    clientX: x,
    clientY: y,
    shiftKey: opts.shiftKey ?? false,
  });
}

export class FakeWs implements WsLike {
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  binaryType?: string;
  closedByClient = false;

  constructor(readonly url: string) {}

  open(): void {
    this.onopen?.();
  }

  pushText(payload: unknown): void {
    this.onmessage?.({ data: JSON.stringify(payload) });
  }

  pushBinary(bytes: Uint8Array): void {
    this.onmessage?.({
      data: bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.byteLength),
    });
  }

  close(): void {
    this.closedByClient = true;
    this.onclose?.();
  }

  /** Server-side drop: fires onclose without marking a client close. */
  drop(): void {
    this.onclose?.();
  }
}

const PALETTE: Array<[number, number, number]> = [
  [0, 1, 0],
  [1, 0, 0],
  [0, 0, 1],
  [1, 1, 0],
  [0, 1, 1],
  [1, 0, 1],
  [1, 1, 1],
  [1, 0.5, 0],
];

const MAX_PEAKS = 8;

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/**
 * Stands in for the rendering service: answers the HTTP routes, hands out
 * scripted websockets, and mimics the session's press-edge handling for the
 * nav-pad buttons so capacity errors surface the same way.
 */
export class MockService {
  tf: TfState = { peaks: [], selected: null };
  bulbColor: [number, number, number] = [1, 1, 1];
  histogram: number[] = Array.from({ length: 256 }, (_, i) => (i % 16) * 10);

  putLog: TfState[] = [];
  sampleLog: SamplePayload[] = [];
  requests: Array<[string, string]> = [];

  ws: FakeWs | null = null;
  frameSeq = 0;

  private prevButtons: Record<string, Set<string>> = {};

  readonly fetchFn: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    this.requests.push([method, path]);

    if (method === "GET" && path === "/state/tf") return jsonResponse(this.tf);
    if (method === "GET" && path === "/state/histogram")
      return jsonResponse({ bins: this.histogram });
    if (method === "GET" && path === "/state/clip")
      return jsonResponse({ enabled: false, normal: [0, 0, 1], offset: 0 });

    if (method === "PUT" && path === "/state/tf") {
      const tf = JSON.parse(String(init?.body)) as TfState;
      if (!Array.isArray(tf.peaks))
        return jsonResponse({ error: "peaks: must be an array" }, 422);
      if (tf.peaks.length > MAX_PEAKS)
        return jsonResponse(
          { error: `peaks: at most ${MAX_PEAKS} allowed, got ${tf.peaks.length}` },
          422,
        );
      for (const p of tf.peaks) {
        if (!(p.width > 0) || !(p.height >= 0))
          return jsonResponse({ error: "bad peak" }, 422);
      }
      this.tf = tf;
      this.putLog.push(tf);
      this.pushEvent({ type: "tf_replaced" });
      this.pushFrame();
      return jsonResponse({ ok: true });
    }

    if (method === "POST" && path === "/input/sample") {
      const sample = JSON.parse(String(init?.body)) as SamplePayload;
      this.sampleLog.push(sample);
      this.applySample(sample);
      return jsonResponse({ queued: true });
    }

    return jsonResponse({ error: `no route ${method} ${path}` }, 404);
  };

  readonly wsFactory: WsFactory = (url) => {
    const ws = new FakeWs(url);
    this.ws = ws;
    queueMicrotask(() => {
      ws.open();
      ws.pushText(this.stateMessage());
      this.pushFrame();
    });
    return ws;
  };

  stateMessage(): ServiceState & { type: string } {
    return {
      type: "state",
      tf: this.tf,
      context: "navigation",
      edit_mode: "center_height",
      bulb_color: this.bulbColor,
      clip: { enabled: false, normal: [0, 0, 1], offset: 0 },
      revision: this.putLog.length,
      counters: { received: this.sampleLog.length },
    };
  }

  pushEvent(event: Record<string, unknown>): void {
    this.ws?.pushText(event);
  }

  pushFrame(): void {
    this.frameSeq += 1;
    this.ws?.pushBinary(
      new Uint8Array([0x89, 0x50, 0x4e, 0x47, this.frameSeq & 0xff, this.frameSeq >> 8]),
    );
  }

  /** Minimal session double: ADD on a nav-pad press edge, capacity status. */
  private applySample(sample: SamplePayload): void {
    if (sample.device !== "nav_pad") return;
    const prev = this.prevButtons[sample.device] ?? new Set();
    const now = new Set(sample.buttons ?? []);
    this.prevButtons[sample.device] = now;

    if (now.has("ADD") && !prev.has("ADD")) {
      if (this.tf.peaks.length >= MAX_PEAKS) {
        this.pushEvent({
          type: "status",
          message: `peak capacity reached (${MAX_PEAKS})`,
        });
        return;
      }
      const color = PALETTE[this.tf.peaks.length % PALETTE.length];
      this.tf.peaks.push({
        center: 0.5,
        width: 0.1,
        height: 0.8,
        color,
        enabled: true,
      });
      this.tf.selected = this.tf.peaks.length - 1;
      this.bulbColor = color;
      this.pushEvent({ type: "peak_added", index: this.tf.selected, color });
      this.pushEvent({ type: "bulb", color });
      this.pushFrame();
    }
  }
}
