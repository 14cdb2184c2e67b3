// Entry point: boots the app into #app when loaded in a page, and re-exports
// the programmatic surface for tests and tooling.

import { boot } from "./router.js";

export { boot, App, parseHash } from "./router.js";
export { configureApi, ApiError, ServiceUnreachableError } from "./api.js";
export * from "./types.js";
export * from "./filters.js";

if (typeof document !== "undefined") {
  const mount = () => {
    const root = document.getElementById("app");
    if (root) boot(root);
  };
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", mount);
  } else {
    mount();
  }
}
