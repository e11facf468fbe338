import { ServiceClient } from "./api";
import { SessionStore } from "./session";
import { App } from "./view";

// Same-origin by default (the dev server proxies /sessions); override
// with ?api=http://host:port when the service runs elsewhere.
const root = document.getElementById("app");
if (root) {
  const base = new URLSearchParams(window.location.search).get("api") ?? "";
  new App(root, { store: new SessionStore(new ServiceClient(base)) });
}
