/** Assembles the UI: frame view, transfer-function editor, bulb, stream. */

import { SampleClock, ServiceClient } from "./api.js";
import { BulbIndicator } from "./bulb.js";
import { FrameView } from "./frame_view.js";
import { bindKeyboard, HelpOverlay } from "./help.js";
import { ModelStore } from "./model.js";
import { NavInput } from "./nav_input.js";
import { StreamClient, WsFactory } from "./stream.js";
import { TfWidget } from "./tf_widget.js";

export interface AppOptions {
  wsFactory?: WsFactory;
  minBackoffMs?: number;
  maxBackoffMs?: number;
}

export interface App {
  model: ModelStore;
  clock: SampleClock;
  stream: StreamClient;
  frameView: FrameView;
  tfWidget: TfWidget;
  navInput: NavInput;
  bulb: BulbIndicator;
  help: HelpOverlay;
  close(): void;
}

const NAV_BASE = {
  device: "nav_pad" as const,
  pos: [0, 0, 0] as [number, number, number],
  quat: [1, 0, 0, 0] as [number, number, number, number],
};

export function createApp(
  root: HTMLElement,
  client: ServiceClient,
  options: AppOptions = {},
): App {
  const doc = root.ownerDocument;
  const model = new ModelStore();
  const clock = new SampleClock();

  root.classList.add("app");

  const header = doc.createElement("header");
  const title = doc.createElement("h1");
  title.textContent = "volume peaks";
  const connection = doc.createElement("span");
  connection.className = "connection";
  const counters = doc.createElement("span");
  counters.className = "counters";
  header.append(title, connection, counters);
  root.appendChild(header);

  const main = doc.createElement("div");
  main.className = "panes";

  const viewPane = doc.createElement("section");
  viewPane.className = "view-pane";
  const frameCanvas = doc.createElement("canvas");
  frameCanvas.className = "frame-canvas";
  frameCanvas.width = 512;
  frameCanvas.height = 512;
  viewPane.appendChild(frameCanvas);
  const hint = doc.createElement("div");
  hint.className = "hint";
  hint.textContent = "drag: rotate · shift+drag: translate · ?: bindings";
  viewPane.appendChild(hint);

  const editPane = doc.createElement("section");
  editPane.className = "edit-pane";
  const statusRow = doc.createElement("div");
  statusRow.className = "status-row";
  const bulb = new BulbIndicator(doc);
  const contextLabel = doc.createElement("span");
  contextLabel.className = "context-label";
  statusRow.append(bulb.el, contextLabel);
  editPane.appendChild(statusRow);

  const tfWidget = new TfWidget(doc, client, model, clock);
  editPane.appendChild(tfWidget.root);

  main.append(viewPane, editPane);
  root.appendChild(main);

  const help = new HelpOverlay(doc);
  root.appendChild(help.el);

  const frameView = new FrameView(frameCanvas);
  const navInput = new NavInput(frameCanvas, client, clock);

  const updateCounters = () => {
    const c = stream.counters;
    counters.textContent =
      `frames ${frameView.presented} (dropped ${frameView.dropped}) · ` +
      `events ${c.events} · reconnects ${c.reconnects}`;
  };

  const refetchTf = async () => {
    try {
      model.setTf(await client.getTf());
    } catch {
      // stream stays authoritative; next event retries
    }
  };

  const stream = new StreamClient(
    client.streamUrl(),
    {
      onState: (state) => model.applyState(state),
      onEvent: (event) => {
        if (model.applyEvent(event) === "refetch-tf") void refetchTf();
      },
      onFrame: (frame) => frameView.present(frame),
      onStatus: (status) => model.setConnection(status),
    },
    {
      wsFactory: options.wsFactory,
      minBackoffMs: options.minBackoffMs,
      maxBackoffMs: options.maxBackoffMs,
    },
  );

  frameView.onPresent = () => updateCounters();
  model.subscribe(() => {
    connection.textContent = model.connection;
    connection.dataset.state = model.connection;
    if (model.state) {
      bulb.setColor(model.state.bulb_color);
      contextLabel.textContent =
        `${model.state.context} / ${model.state.edit_mode}` +
        (model.state.clip.enabled ? " / clipped" : "");
    }
    updateCounters();
  });

  // context switch rides on a long SELECT_NEXT press, so emulate one by
  // jumping sample time past the threshold between press and release
  const toggleContext = async () => {
    await client.injectSample({
      ...NAV_BASE,
      timestamp_us: clock.next(),
      buttons: ["SELECT_NEXT"],
    });
    clock.advance(650_000);
    await client.injectSample({
      ...NAV_BASE,
      timestamp_us: clock.next(),
      buttons: ["SELECT_NEXT"],
    });
    await client.injectSample({ ...NAV_BASE, timestamp_us: clock.next(), buttons: [] });
  };

  bindKeyboard(doc, {
    add: () => void tfWidget.pressNavButton("ADD"),
    delete: () => void tfWidget.pressNavButton("DELETE"),
    toggleEnable: () => void tfWidget.pressNavButton("TOGGLE_ENABLE"),
    selectNext: () => void tfWidget.pressNavButton("SELECT_NEXT"),
    cycleColor: () => void tfWidget.pressNavButton("CYCLE_COLOR"),
    toggleContext: () => void toggleContext(),
    toggleHelp: () => help.toggle(),
  });

  void client
    .getHistogram()
    .then((bins) => model.setHistogram(bins))
    .catch(() => model.setMessage("histogram unavailable"));

  stream.connect();
  updateCounters();

  return {
    model,
    clock,
    stream,
    frameView,
    tfWidget,
    navInput,
    bulb,
    help,
    close: () => stream.close(),
  };
}
