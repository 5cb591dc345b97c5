/**
 * Bootstrap: mount the app on #app, pointing at the service named by the
 * ?service= query parameter (same origin when absent).
 */

import { Api } from "./api.js";
import { App } from "./app.js";

const base = new URLSearchParams(window.location.search).get("service") ?? "";
const root = document.querySelector("#app");
if (root instanceof HTMLElement) {
  void new App(root, new Api(base)).start();
}
