/** Selected-peak indicator: a colored orb that mirrors the session bulb. */

import { cssColor, Rgb } from "./model.js";

export class BulbIndicator {
  readonly el: HTMLElement;

  constructor(doc: Document) {
    this.el = doc.createElement("div");
    this.el.className = "bulb";
    this.el.title = "selected peak color";
    this.setColor([1, 1, 1]);
  }

  setColor(color: Rgb): void {
    this.el.style.backgroundColor = cssColor(color);
  }
}
