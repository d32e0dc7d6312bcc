/** Typed client for the service's HTTP endpoints. */

import { ClipState, TfState } from "./model.js";

export interface SamplePayload {
  device: "main" | "nav_pad";
  timestamp_us: number;
  pos: [number, number, number];
  quat: [number, number, number, number];
  buttons?: string[];
  trigger?: number;
}

export interface PutResult {
  ok: boolean;
  error?: string;
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Strictly increasing microsecond timestamps for injected samples. */
export class SampleClock {
  private last = 0;

  next(): number {
    const now = Math.round(
      (typeof performance !== "undefined" ? performance.now() : Date.now()) * 1000,
    );
    this.last = Math.max(this.last + 1, now);
    return this.last;
  }

  /** Jump sample time forward, e.g. to emulate a held button. */
  advance(us: number): void {
    this.last += us;
  }
}

export class ServiceClient {
  private fetchFn: FetchLike;

  constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  streamUrl(): string {
    return this.baseUrl.replace(/^http/, "ws") + "/stream";
  }

  frameUrl(): string {
    return `${this.baseUrl}/frame/latest`;
  }

  async getTf(): Promise<TfState> {
    const resp = await this.fetchFn(`${this.baseUrl}/state/tf`);
    return (await resp.json()) as TfState;
  }

  /** Replace the whole transfer function; 422 comes back as {ok: false}. */
  async putTf(tf: TfState): Promise<PutResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/state/tf`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(tf),
    });
    if (resp.ok) return { ok: true };
    const body = await resp.json().catch(() => ({}));
    return { ok: false, error: String(body.error ?? resp.status) };
  }

  async getHistogram(): Promise<number[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/state/histogram`);
    const body = await resp.json();
    return body.bins as number[];
  }

  async getClip(): Promise<ClipState> {
    const resp = await this.fetchFn(`${this.baseUrl}/state/clip`);
    return (await resp.json()) as ClipState;
  }

  async injectSample(sample: SamplePayload): Promise<PutResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/input/sample`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(sample),
    });
    if (resp.ok) return { ok: true };
    const body = await resp.json().catch(() => ({}));
    return { ok: false, error: String(body.error ?? resp.status) };
  }
}
