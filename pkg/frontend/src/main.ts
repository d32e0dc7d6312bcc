/** Browser entry point: wire the app to the service named in the URL. */

import { ServiceClient } from "./api.js";
import { createApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:7780";

const root = document.getElementById("app");
if (root) {
  createApp(root, new ServiceClient(serviceUrl));
} else {
  console.error("missing #app element");
}
