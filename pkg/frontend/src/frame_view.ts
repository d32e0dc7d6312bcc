/** Renders the latest streamed frame to a canvas, latest-wins. */

export class FrameView {
  readonly canvas: HTMLCanvasElement;

  presented = 0;
  dropped = 0;
  lastBlob: Blob | null = null;
  onPresent: ((blob: Blob) => void) | null = null;

  private pending: Blob | null = null;
  private flushing = false;
  private ctxFailed = false;

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
  }

  /** Queue a frame; bursts collapse so only the newest is drawn. */
  present(blob: Blob): void {
    if (this.pending !== null) this.dropped += 1;
    this.pending = blob;
    if (!this.flushing) {
      this.flushing = true;
      queueMicrotask(() => void this.flush());
    }
  }

  private async flush(): Promise<void> {
    while (this.pending !== null) {
      const blob = this.pending;
      this.pending = null;
      await this.draw(blob);
      this.presented += 1;
      this.lastBlob = blob;
      this.onPresent?.(blob);
    }
    this.flushing = false;
  }

  private async draw(blob: Blob): Promise<void> {
    // decode/draw is best-effort: under test there is no real canvas, and
    // probing createImageBitmap first keeps headless DOMs quiet
    if (this.ctxFailed || typeof createImageBitmap !== "function") return;
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = this.canvas.getContext("2d");
    } catch {
      ctx = null;
    }
    if (!ctx) {
      this.ctxFailed = true;
      return;
    }
    try {
      const bitmap = await createImageBitmap(blob);
      if (this.canvas.width !== bitmap.width) this.canvas.width = bitmap.width;
      if (this.canvas.height !== bitmap.height) this.canvas.height = bitmap.height;
      ctx.drawImage(bitmap, 0, 0);
      bitmap.close();
    } catch {
      // a bad frame must not stall the counters
    }
  }
}
