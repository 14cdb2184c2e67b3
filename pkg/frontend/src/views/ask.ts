// Question-answering panel: ask in natural language, read the generated
// answer, and pivot into the browser via cited-incident chips. History is
// append-only for the session, so earlier answers stay available to inform
// follow-up questions.

import { ApiError, postQuery, ServiceUnreachableError } from "../api.js";
import { filterToSearch } from "../filters.js";
import { splitKey } from "../types.js";
import type { QaEntry } from "../state.js";
import { clear, el } from "../dom.js";
import type { AppContext } from "../context.js";

export function renderAsk(root: HTMLElement, ctx: AppContext): void {
  const { state } = ctx;

  const input = el("textarea", {
    id: "ask-input",
    placeholder: "e.g. What happened to Zephyrline Airways?",
    "aria-label": "Question",
  });
  input.value = state.askDraft;
  const submit = el("button", { type: "submit", id: "ask-submit" }, ["Ask"]);
  submit.disabled = state.askDraft.trim() === "";

  const form = el("form", { class: "ask-form", id: "ask-form" }, [
    input,
    el("div", { class: "ask-controls" }, [submit]),
  ]);
  const history = el("div", { id: "qa-history" });
  root.append(form, history);

  input.addEventListener("input", () => {
    state.askDraft = input.value;
    submit.disabled = input.value.trim() === "";
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = input.value.trim();
    if (!question) return;
    state.askDraft = "";
    input.value = "";
    submit.disabled = true;
    ask(question);
    input.focus();
  });

  function ask(question: string): void {
    const entry = state.appendQa(question);
    renderHistory();
    void ctx.track(run(entry));
  }

  async function run(entry: QaEntry): Promise<void> {
    try {
      entry.result = await postQuery(entry.question);
    } catch (err) {
      if (err instanceof ApiError && err.slug === "empty_retrieval") {
        entry.error = { kind: "empty_retrieval", message: "No relevant incidents found for this question." };
      } else if (err instanceof ApiError && err.status === 400) {
        entry.error = { kind: "invalid", message: err.detail || err.slug };
      } else if (err instanceof ApiError) {
        entry.error = { kind: "provider", message: err.detail || err.slug };
      } else if (err instanceof ServiceUnreachableError) {
        entry.error = { kind: "unreachable", message: "Service unreachable — check that the API is running." };
      } else {
        entry.error = { kind: "provider", message: String(err) };
      }
    }
    renderHistory();
  }

  function renderHistory(): void {
    clear(history);
    for (const entry of state.qaHistory) {
      history.append(buildCard(entry));
    }
  }

  function buildCard(entry: QaEntry): HTMLElement {
    const card = el("div", { class: "qa-card" }, [el("p", { class: "qa-question" }, [entry.question])]);

    if (entry.result) {
      const answer = el("div", { class: "qa-answer" });
      for (const paragraph of entry.result.answer.split(/\n{2,}/)) {
        if (paragraph.trim()) answer.append(el("p", {}, [paragraph]));
      }
      card.append(answer);

      const chips = el("div", { class: "chip-row" });
      for (const key of entry.result.cited_keys) {
        const parts = splitKey(key);
        if (!parts) continue;
        const target = { filter: { source: parts.source }, row: parts, hash: "#/browse" };
        const chip = el(
          "a",
          { class: "chip", "data-key": key, href: `${filterToSearch(target.filter, parts)}#/browse` },
          [key],
        );
        chip.addEventListener("click", (event) => {
          event.preventDefault();
          ctx.navigate(target);
        });
        chips.append(chip);
      }
      if (chips.childElementCount > 0) card.append(chips);
      return card;
    }

    if (entry.error) {
      const { kind, message } = entry.error;
      card.classList.add(kind === "empty_retrieval" ? "card-info" : "card-error");
      card.append(el("p", { class: "qa-error" }, [message]));
      if (kind === "provider" || kind === "unreachable") {
        const retry = el("button", { class: "secondary qa-retry", type: "button" }, ["Retry"]);
        retry.addEventListener("click", () => ask(entry.question));
        card.append(retry);
      }
      return card;
    }

    card.append(el("p", { class: "qa-pending" }, ["Answering…"]));
    return card;
  }

  renderHistory();
}
