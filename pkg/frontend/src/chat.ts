/**
 * Chat demo: submit-time notifier flow and the comment feed.
 *
 * A submission first goes through /check; only an allow=true verdict posts
 * the comment (which then records feedback via /score and rescores the
 * page).  A blocked comment never reaches the feed.
 */

import { ApiClient, ApiError, ApiUnreachableError, SchemaError } from "./api.js";
import { Store } from "./state.js";

export type SubmitOutcome = "posted" | "blocked" | "invalid" | "failed";

export async function submitWithNotifier(
  store: Store,
  api: ApiClient,
  rawText: string,
): Promise<SubmitOutcome> {
  const text = rawText.trim();
  if (!text) {
    store.setNotice("type a comment first");
    return "invalid";
  }

  let verdict;
  try {
    verdict = await api.check(text);
  } catch (error) {
    if (error instanceof ApiUnreachableError) {
      store.setApiDown(true);
      store.setNotice("moderation service unreachable — submitting is disabled");
      return "failed";
    }
    if (error instanceof ApiError || error instanceof SchemaError) {
      store.setBanner(error.message);
      return "failed";
    }
    throw error;
  }

  if (!verdict.allow) {
    store.setNotice(
      `your comment was classified as ${verdict.label} and will not be posted`,
      verdict.language,
    );
    return "blocked";
  }

  try {
    const result = await api.score(text);
    store.addComment(text, result);
    const seq = store.beginPageScore();
    const page = await api.pageScore(store.state.comments.map((c) => c.text));
    store.applyPageScore(page, seq);
    return "posted";
  } catch (error) {
    if (error instanceof ApiUnreachableError) {
      store.setApiDown(true);
      store.setNotice("moderation service unreachable — submitting is disabled");
      return "failed";
    }
    if (error instanceof ApiError || error instanceof SchemaError) {
      store.setBanner(error.message);
      return "failed";
    }
    throw error;
  }
}

/** Refresh the gauge from the server; errors raise the banner, data stays. */
export async function refreshPageScore(store: Store, api: ApiClient): Promise<void> {
  const comments = store.state.comments.map((c) => c.text);
  if (comments.length === 0) return;
  const seq = store.beginPageScore();
  try {
    const page = await api.pageScore(comments);
    store.applyPageScore(page, seq);
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

export function renderChat(container: HTMLElement, store: Store): void {
  const state = store.state;
  container.innerHTML = "";

  if (state.notice) {
    const notice = document.createElement("div");
    notice.className = "notice";
    notice.setAttribute("data-testid", "notifier");
    notice.textContent = state.notice;
    container.appendChild(notice);
  }

  const list = document.createElement("ul");
  list.className = "comments";
  list.setAttribute("data-testid", "comments");
  for (const comment of state.comments) {
    const item = document.createElement("li");
    const text = document.createElement("span");
    text.className = "comment-text";
    text.textContent = comment.text;
    const meta = document.createElement("span");
    meta.className = `comment-meta ${comment.result.label}`;
    meta.textContent = ` [${comment.result.label} · ${comment.result.language} · v${comment.result.model_version}]`;
    item.appendChild(text);
    item.appendChild(meta);
    list.appendChild(item);
  }
  container.appendChild(list);

  const indicator = document.createElement("p");
  indicator.className = "language-indicator";
  indicator.setAttribute("data-testid", "language-indicator");
  indicator.textContent = state.language
    ? `active language: ${state.language}`
    : "active language: —";
  container.appendChild(indicator);
}
