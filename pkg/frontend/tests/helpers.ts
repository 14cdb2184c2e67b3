// Shared jsdom test helpers.

import { boot, type App } from "../src/router.js";

/** Set the page URL (path + search + hash) without navigation side effects. */
export function setUrl(path: string): void {
  history.replaceState(null, "", path);
}

/** Mount a fresh app instance into the document and wait for it to settle. */
export async function bootApp(): Promise<{ app: App; root: HTMLElement }> {
  const root = document.createElement("div");
  document.body.append(root);
  const app = boot(root);
  await app.whenIdle();
  return { app, root };
}

export function resetDom(): void {
  document.body.innerHTML = "";
  setUrl("/");
}

/** Flush queued macrotasks (e.g. jsdom hashchange dispatch). */
export async function flushEvents(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function tableRows(root: HTMLElement): HTMLTableRowElement[] {
  return [...root.querySelectorAll<HTMLTableRowElement>(".incident-table tbody tr")];
}

export function submitForm(form: HTMLFormElement): void {
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export function setInput(input: HTMLInputElement | HTMLTextAreaElement, value: string): void {
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}
