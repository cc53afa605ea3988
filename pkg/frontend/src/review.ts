/**
 * Moderator workbench: the review queue mirrors GET /review; confirm and
 * relabel call /resolve and drop the row; retrain surfaces the new version.
 */

import { ApiClient, ApiError, ApiUnreachableError, SchemaError } from "./api.js";
import { Store } from "./state.js";
import { LABELS, Label, Language } from "./types.js";

export async function loadReviewQueue(
  store: Store,
  api: ApiClient,
  language?: Language,
): Promise<void> {
  try {
    store.setReview(await api.review(language));
  } catch (error) {
    if (error instanceof ApiUnreachableError) {
      store.setApiDown(true);
      return;
    }
    if (error instanceof ApiError || error instanceof SchemaError) {
      store.setBanner(error.message);
      return;
    }
    throw error;
  }
}

export async function resolveItem(
  store: Store,
  api: ApiClient,
  id: string,
  verdict: "confirmed" | "relabeled",
  label?: Label,
): Promise<void> {
  try {
    await api.resolve(id, verdict, label);
    store.removeReviewItem(id);
  } catch (error) {
    if (error instanceof ApiError && error.code === "already_resolved") {
      // Someone beat us to it; mirror the server by dropping the row.
      store.removeReviewItem(id);
      store.setToast(error.message);
      return;
    }
    if (error instanceof ApiUnreachableError) {
      store.setApiDown(true);
      return;
    }
    if (error instanceof ApiError || error instanceof SchemaError) {
      store.setToast(error.message);
      return;
    }
    throw error;
  }
}

export async function triggerRetrain(
  store: Store,
  api: ApiClient,
  language: Language,
): Promise<void> {
  try {
    const result = await api.retrain(language);
    store.setRetrainStatus(`${result.language} model now v${result.version}`);
  } catch (error) {
    if (error instanceof ApiUnreachableError) {
      store.setApiDown(true);
      return;
    }
    if (error instanceof ApiError || error instanceof SchemaError) {
      store.setToast(error.message); // API error shown verbatim
      return;
    }
    throw error;
  }
}

export interface ReviewHandlers {
  onResolve: (id: string, verdict: "confirmed" | "relabeled", label?: Label) => void;
  onRetrain: (language: Language) => void;
}

export function renderReview(
  container: HTMLElement,
  store: Store,
  handlers: ReviewHandlers,
): void {
  const state = store.state;
  container.innerHTML = "";

  if (state.toast) {
    const toast = document.createElement("div");
    toast.className = "toast";
    toast.setAttribute("data-testid", "toast");
    toast.textContent = state.toast;
    container.appendChild(toast);
  }

  if (state.retrainStatus) {
    const status = document.createElement("p");
    status.className = "retrain-status";
    status.setAttribute("data-testid", "retrain-status");
    status.textContent = state.retrainStatus;
    container.appendChild(status);
  }

  const models = document.createElement("p");
  models.className = "model-versions";
  models.setAttribute("data-testid", "model-versions");
  models.textContent = Object.entries(state.models)
    .map(([language, info]) => `${language}: v${info.version}`)
    .join("  ") || "models: —";
  container.appendChild(models);

  const table = document.createElement("table");
  table.className = "review-table";
  table.setAttribute("data-testid", "review-table");
  for (const item of state.review) {
    const row = document.createElement("tr");
    row.setAttribute("data-testid", `review-${item.id}`);

    const text = document.createElement("td");
    text.textContent = item.text;
    row.appendChild(text);

    const predicted = document.createElement("td");
    predicted.textContent = `${item.predicted} (${item.confidence.toFixed(2)}, ${item.language})`;
    row.appendChild(predicted);

    const actions = document.createElement("td");
    const confirm = document.createElement("button");
    confirm.textContent = "confirm";
    confirm.setAttribute("data-testid", `confirm-${item.id}`);
    confirm.addEventListener("click", () => handlers.onResolve(item.id, "confirmed"));
    actions.appendChild(confirm);

    for (const label of LABELS) {
      const relabel = document.createElement("button");
      relabel.textContent = label;
      relabel.setAttribute("data-testid", `relabel-${item.id}-${label}`);
      relabel.addEventListener("click", () =>
        handlers.onResolve(item.id, "relabeled", label),
      );
      actions.appendChild(relabel);
    }
    row.appendChild(actions);
    table.appendChild(row);
  }
  container.appendChild(table);

  if (state.review.length === 0) {
    const empty = document.createElement("p");
    empty.className = "review-empty";
    empty.setAttribute("data-testid", "review-empty");
    empty.textContent = "review queue is empty";
    container.appendChild(empty);
  }

  const retrainRow = document.createElement("div");
  retrainRow.className = "retrain-row";
  for (const language of ["en", "hi", "hi_codemix"] as const) {
    const button = document.createElement("button");
    button.textContent = `retrain ${language}`;
    button.setAttribute("data-testid", `retrain-${language}`);
    button.addEventListener("click", () => handlers.onRetrain(language));
    retrainRow.appendChild(button);
  }
  container.appendChild(retrainRow);
}
