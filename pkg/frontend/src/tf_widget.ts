/** Canvas transfer-function editor.
 *
 * Histogram in white behind the peak curves, each curve in its peak's color,
 * the selected peak highlighted with a filled handle. Dragging a handle moves
 * center/height; shift-drag adjusts width; the button row fires the discrete
 * peak actions. Every gesture goes to the service — the widget repaints only
 * when the model changes underneath it.
 */

import { SampleClock, ServiceClient } from "./api.js";
import { cssColor, ModelStore, peakValue, TfState } from "./model.js";

export const WIDGET_WIDTH = 512;
export const WIDGET_HEIGHT = 160;
const HANDLE_RADIUS = 10;
const MIN_WIDTH = 1e-3;
const PUT_THROTTLE_MS = 80;

const clamp = (x: number, lo: number, hi: number) =>
  x < lo ? lo : x > hi ? hi : x;

// one probe per page: headless DOMs have no 2d context and say so loudly
let canvas2dBroken = false;

function get2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  if (canvas2dBroken) return null;
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    ctx = null;
  }
  if (!ctx) canvas2dBroken = true;
  return ctx;
}

interface DragState {
  index: number;
  startX: number;
  startY: number;
  center: number;
  width: number;
  height: number;
  moved: boolean;
}

const BUTTONS: Array<[string, string]> = [
  ["add", "ADD"],
  ["delete", "DELETE"],
  ["enable", "TOGGLE_ENABLE"],
  ["next", "SELECT_NEXT"],
  ["color", "CYCLE_COLOR"],
];

export class TfWidget {
  readonly root: HTMLElement;
  readonly canvas: HTMLCanvasElement;
  readonly messageLine: HTMLElement;

  private drag: DragState | null = null;
  private lastPutAt = 0;
  private putChain: Promise<unknown> = Promise.resolve();

  constructor(
    doc: Document,
    private readonly client: ServiceClient,
    private readonly model: ModelStore,
    private readonly clock: SampleClock,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "tf-widget";

    this.canvas = doc.createElement("canvas");
    this.canvas.width = WIDGET_WIDTH;
    this.canvas.height = WIDGET_HEIGHT;
    this.canvas.className = "tf-canvas";
    this.root.appendChild(this.canvas);

    const row = doc.createElement("div");
    row.className = "tf-buttons";
    for (const [label, button] of BUTTONS) {
      const el = doc.createElement("button");
      el.textContent = label;
      el.dataset.action = label;
      el.addEventListener("click", () => void this.pressNavButton(button));
      row.appendChild(el);
    }
    this.root.appendChild(row);

    this.messageLine = doc.createElement("div");
    this.messageLine.className = "tf-message";
    this.root.appendChild(this.messageLine);

    this.canvas.addEventListener("pointerdown", (ev) => this.onDown(ev as PointerEvent));
    this.canvas.addEventListener("pointermove", (ev) => this.onMove(ev as PointerEvent));
    this.canvas.addEventListener("pointerup", (ev) => void this.onUp(ev as PointerEvent));

    model.subscribe(() => {
      this.messageLine.textContent = model.message;
      this.redraw();
    });
  }

  /** Index of the peak whose handle covers the canvas point, or null. */
  hitTest(x: number, y: number): number | null {
    const tf = this.model.state?.tf;
    if (!tf) return null;
    let best: number | null = null;
    let bestDist = HANDLE_RADIUS;
    tf.peaks.forEach((peak, i) => {
      const hx = peak.center * WIDGET_WIDTH;
      const hy = (1 - peak.height) * WIDGET_HEIGHT;
      const dist = Math.hypot(x - hx, y - hy);
      if (dist <= bestDist) {
        best = i;
        bestDist = dist;
      }
    });
    return best;
  }

  /** Fire one nav-pad button at the service: press edge, then release. */
  async pressNavButton(button: string): Promise<void> {
    const base = {
      device: "nav_pad" as const,
      pos: [0, 0, 0] as [number, number, number],
      quat: [1, 0, 0, 0] as [number, number, number, number],
    };
    const press = await this.client.injectSample({
      ...base,
      timestamp_us: this.clock.next(),
      buttons: [button],
    });
    if (!press.ok) {
      this.model.setMessage(press.error ?? "request failed");
      return;
    }
    await this.client.injectSample({
      ...base,
      timestamp_us: this.clock.next(),
      buttons: [],
    });
  }

  private canvasPoint(ev: PointerEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  }

  private onDown(ev: PointerEvent): void {
    const [x, y] = this.canvasPoint(ev);
    const index = this.hitTest(x, y);
    if (index === null) return;
    const peak = this.model.state!.tf.peaks[index];
    this.drag = {
      index,
      startX: x,
      startY: y,
      center: peak.center,
      width: peak.width,
      height: peak.height,
      moved: false,
    };
    if (typeof this.canvas.setPointerCapture === "function") {
      try {
        this.canvas.setPointerCapture(ev.pointerId);
      } catch {
        // jsdom has the method but no pointer state
      }
    }
  }

  private draggedTf(ev: PointerEvent): TfState {
    const drag = this.drag!;
    const [x, y] = this.canvasPoint(ev);
    const tf = structuredClone(this.model.state!.tf) as TfState;
    const peak = tf.peaks[drag.index];
    if (ev.shiftKey) {
      peak.width = clamp(drag.width + (x - drag.startX) / WIDGET_WIDTH, MIN_WIDTH, 0.5);
    } else {
      peak.center = clamp(drag.center + (x - drag.startX) / WIDGET_WIDTH, 0, 1);
      peak.height = clamp(drag.height - (y - drag.startY) / WIDGET_HEIGHT, 0, 1);
    }
    tf.selected = drag.index;
    return tf;
  }

  private sendTf(tf: TfState): void {
    // serialize PUTs so a slow response cannot reorder behind a newer drag
    this.putChain = this.putChain.then(async () => {
      const result = await this.client.putTf(tf);
      if (!result.ok) this.model.setMessage(result.error ?? "rejected");
    });
  }

  private onMove(ev: PointerEvent): void {
    if (!this.drag) return;
    this.drag.moved = true;
    const now = Date.now();
    if (now - this.lastPutAt < PUT_THROTTLE_MS) return;
    this.lastPutAt = now;
    this.sendTf(this.draggedTf(ev));
  }

  private async onUp(ev: PointerEvent): Promise<void> {
    if (!this.drag) return;
    const tf = this.drag.moved
      ? this.draggedTf(ev)
      : { ...structuredClone(this.model.state!.tf), selected: this.drag.index };
    this.drag = null;
    this.sendTf(tf);
    await this.putChain;
  }

  redraw(): void {
    const ctx = get2d(this.canvas);
    if (!ctx) return;
    const w = WIDGET_WIDTH;
    const h = WIDGET_HEIGHT;
    ctx.fillStyle = "#14161a";
    ctx.fillRect(0, 0, w, h);

    const bins = this.model.histogram;
    if (bins.length > 0) {
      const peakBin = Math.max(...bins, 1);
      ctx.fillStyle = "rgba(255, 255, 255, 0.35)";
      const barWidth = w / bins.length;
      bins.forEach((count, i) => {
        const height = Math.sqrt(count / peakBin) * (h - 4);
        ctx.fillRect(i * barWidth, h - height, barWidth, height);
      });
    }

    const tf = this.model.state?.tf;
    if (!tf) return;
    tf.peaks.forEach((peak, i) => {
      const selected = i === tf.selected;
      ctx.strokeStyle = cssColor(peak.color);
      ctx.lineWidth = selected ? 3 : 1.5;
      ctx.globalAlpha = peak.enabled ? 1.0 : 0.35;
      ctx.setLineDash(peak.enabled ? [] : [4, 4]);
      ctx.beginPath();
      const steps = 64;
      for (let s = 0; s <= steps; s++) {
        const x = peak.center - peak.width + (2 * peak.width * s) / steps;
        const px = clamp(x, 0, 1) * w;
        const py = (1 - peakValue(peak, x)) * h;
        if (s === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      }
      ctx.stroke();
      ctx.setLineDash([]);

      const hx = peak.center * w;
      const hy = (1 - peak.height) * h;
      ctx.beginPath();
      ctx.arc(hx, hy, selected ? 6 : 4, 0, 2 * Math.PI);
      ctx.fillStyle = cssColor(peak.color);
      if (selected) ctx.fill();
      else ctx.stroke();
      ctx.globalAlpha = 1.0;
    });
  }
}
