/** Client-side mirror of the service state, updated from stream events. */

export type Rgb = [number, number, number];

export interface PeakState {
  center: number;
  width: number;
  height: number;
  color: Rgb;
  enabled: boolean;
}

export interface TfState {
  peaks: PeakState[];
  selected: number | null;
}

export interface ClipState {
  enabled: boolean;
  normal: [number, number, number];
  offset: number;
}

export interface ServiceState {
  tf: TfState;
  context: string;
  edit_mode: string;
  bulb_color: Rgb;
  clip: ClipState;
  revision: number;
  counters: Record<string, number>;
}

export interface StreamEvent {
  type: string;
  [key: string]: unknown;
}

export const MAX_PEAKS = 8;

/** Peak profile, matching the service's windowed-sine curve. */
export function peakValue(p: PeakState, x: number): number {
  if (x < p.center - p.width || x > p.center + p.width) return 0;
  return p.height * Math.sin((Math.PI / (2 * p.width)) * (x - p.center + p.width));
}

export function cssColor(color: Rgb): string {
  const [r, g, b] = color.map((c) => Math.round(c * 255));
  return `rgb(${r}, ${g}, ${b})`;
}

/** Instruction for the app after applying an event. */
export type EventAction = "refetch-tf" | null;

/**
 * Holds the latest known service state. Never mutated by gestures directly:
 * gestures go to the service, and the store changes only when the service
 * answers with events or fresh state.
 */
export class ModelStore {
  state: ServiceState | null = null;
  histogram: number[] = [];
  message = "";
  connection = "connecting";

  private listeners: Array<() => void> = [];

  subscribe(fn: () => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  applyState(state: ServiceState): void {
    this.state = state;
    this.emit();
  }

  setTf(tf: TfState): void {
    if (this.state) {
      this.state.tf = tf;
      this.emit();
    }
  }

  setHistogram(bins: number[]): void {
    this.histogram = bins;
    this.emit();
  }

  setMessage(message: string): void {
    this.message = message;
    this.emit();
  }

  setConnection(connection: string): void {
    this.connection = connection;
    this.emit();
  }

  get selectedPeak(): PeakState | null {
    const tf = this.state?.tf;
    if (!tf || tf.selected === null) return null;
    return tf.peaks[tf.selected] ?? null;
  }

  /**
   * Fold one stream event into the model. Peak-shape events carry indices
   * but not full peak data, so they ask the app to refetch the TF.
   */
  applyEvent(event: StreamEvent): EventAction {
    if (!this.state) return null;
    switch (event.type) {
      case "bulb":
        this.state.bulb_color = event.color as Rgb;
        this.emit();
        return null;
      case "status":
        this.setMessage(String(event.message));
        return null;
      case "context":
        this.state.context = String(event.context);
        this.emit();
        return null;
      case "edit_mode":
        this.state.edit_mode = String(event.mode);
        this.emit();
        return null;
      case "clip_plane":
        this.state.clip.enabled = Boolean(event.enabled);
        this.emit();
        return null;
      case "peak_added":
      case "peak_deleted":
      case "peak_toggled":
      case "peak_color":
      case "peak_selected":
      case "peak_changed":
      case "tf_replaced":
        return "refetch-tf";
      default:
        return null;
    }
  }
}
