/** Pointer-drag navigation on the frame canvas.
 *
 * A plain drag is interpreted as rotation: the pointer offset becomes a wand
 * position with the trigger held. Shift-drag is translation: same offset with
 * the grab button held instead. Horizontal motion maps to x, vertical to y
 * (flipped, since screen y grows downward). Every gesture is forwarded as
 * main-hand samples; the UI itself never moves the volume.
 */

import { SampleClock, SamplePayload, ServiceClient } from "./api.js";

export const ROTATE_SCALE = 0.004; // meters of wand travel per pixel
export const TRANSLATE_SCALE = 0.05;
const MOVE_THROTTLE_MS = 25;

type Mode = "rotate" | "translate";

const IDENTITY: [number, number, number, number] = [1, 0, 0, 0];

export class NavInput {
  sent = 0;

  private dragging: Mode | null = null;
  private originX = 0;
  private originY = 0;
  private lastSentAt = 0;

  constructor(
    private readonly surface: HTMLElement,
    private readonly client: ServiceClient,
    private readonly clock: SampleClock,
  ) {
    surface.addEventListener("pointerdown", (ev) => void this.onDown(ev as PointerEvent));
    surface.addEventListener("pointermove", (ev) => void this.onMove(ev as PointerEvent));
    surface.addEventListener("pointerup", (ev) => void this.onUp(ev as PointerEvent));
  }

  private sample(ev: PointerEvent, mode: Mode, held: boolean): SamplePayload {
    const scale = mode === "rotate" ? ROTATE_SCALE : TRANSLATE_SCALE;
    const dx = (ev.clientX - this.originX) * scale;
    const dy = -(ev.clientY - this.originY) * scale;
    return {
      device: "main",
      timestamp_us: this.clock.next(),
      pos: [dx, dy, 0],
      quat: IDENTITY,
      buttons: held && mode === "translate" ? ["BIG"] : [],
      trigger: held && mode === "rotate" ? 1.0 : 0.0,
    };
  }

  private async send(sample: SamplePayload): Promise<void> {
    const result = await this.client.injectSample(sample);
    if (result.ok) this.sent++;
  }

  private async onDown(ev: PointerEvent): Promise<void> {
    this.dragging = ev.shiftKey ? "translate" : "rotate";
    this.originX = ev.clientX;
    this.originY = ev.clientY;
    if (typeof this.surface.setPointerCapture === "function") {
      try {
        this.surface.setPointerCapture(ev.pointerId);
      } catch {
        // no real pointer behind synthetic events
      }
    }
    // anchor: establish the grab with zero offset so the first move is a delta
    await this.send(this.sample(ev, this.dragging, true));
  }

  private async onMove(ev: PointerEvent): Promise<void> {
    if (!this.dragging) return;
    const now = Date.now();
    if (now - this.lastSentAt < MOVE_THROTTLE_MS) return;
    this.lastSentAt = now;
    await this.send(this.sample(ev, this.dragging, true));
  }

  private async onUp(ev: PointerEvent): Promise<void> {
    if (!this.dragging) return;
    const mode = this.dragging;
    this.dragging = null;
    await this.send(this.sample(ev, mode, true));
    await this.send(this.sample(ev, mode, false)); // release
  }
}
