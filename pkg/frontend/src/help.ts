/** Keyboard bindings and the "?" help overlay. */

export interface KeyActions {
  add(): void;
  delete(): void;
  toggleEnable(): void;
  selectNext(): void;
  cycleColor(): void;
  toggleContext(): void;
  toggleHelp(): void;
}

const BINDINGS: Array<[string, string]> = [
  ["A", "add a peak"],
  ["D", "delete the selected peak"],
  ["E", "enable / disable the selected peak"],
  ["N", "select the next peak"],
  ["C", "cycle the selected peak's color"],
  ["X", "switch between navigation and edit context"],
  ["?", "toggle this help"],
  ["drag image", "rotate the volume"],
  ["shift+drag image", "translate the volume"],
  ["drag handle", "move a peak (center / height)"],
  ["shift+drag handle", "resize a peak (width)"],
];

export class HelpOverlay {
  readonly el: HTMLElement;

  constructor(doc: Document) {
    this.el = doc.createElement("div");
    this.el.className = "help-overlay";
    this.el.hidden = true;
    const title = doc.createElement("h2");
    title.textContent = "Bindings";
    this.el.appendChild(title);
    const list = doc.createElement("dl");
    for (const [key, what] of BINDINGS) {
      const dt = doc.createElement("dt");
      dt.textContent = key;
      const dd = doc.createElement("dd");
      dd.textContent = what;
      list.appendChild(dt);
      list.appendChild(dd);
    }
    this.el.appendChild(list);
  }

  toggle(): void {
    this.el.hidden = !this.el.hidden;
  }
}

export function bindKeyboard(doc: Document, actions: KeyActions): void {
  doc.addEventListener("keydown", (ev) => {
    const event = ev as KeyboardEvent;
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    switch (event.key.toLowerCase()) {
      case "a":
        actions.add();
        break;
      case "d":
        actions.delete();
        break;
      case "e":
        actions.toggleEnable();
        break;
      case "n":
        actions.selectNext();
        break;
      case "c":
        actions.cycleColor();
        break;
      case "x":
        actions.toggleContext();
        break;
      case "?":
        actions.toggleHelp();
        break;
    }
  });
}
