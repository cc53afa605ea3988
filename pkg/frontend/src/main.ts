/**
 * App bootstrap: one SPA, two views (chat demo / moderator dashboard),
 * 1-second polling for the page gauge and the review queue.
 */

import { ApiClient, ApiUnreachableError } from "./api.js";
import { refreshPageScore, renderChat, submitWithNotifier } from "./chat.js";
import { renderGauge } from "./gauge.js";
import { loadReviewQueue, renderReview, resolveItem, triggerRetrain } from "./review.js";
import { Store } from "./state.js";

const POLL_INTERVAL_MS = 1000;

export function startApp(root: HTMLElement): () => void {
  root.innerHTML = `
    <header>
      <h1>hatewatch moderation</h1>
      <nav>
        <button id="tab-chat" class="tab active">chat demo</button>
        <button id="tab-dashboard" class="tab">moderator dashboard</button>
      </nav>
    </header>
    <main>
      <section id="view-chat">
        <div id="gauge" class="gauge"></div>
        <div id="chat"></div>
        <form id="composer">
          <input id="composer-text" type="text" placeholder="say something…" autocomplete="off" />
          <button id="composer-send" type="submit">post</button>
        </form>
      </section>
      <section id="view-dashboard" hidden>
        <div id="review"></div>
      </section>
    </main>
  `;

  const store = new Store();
  const api = new ApiClient("");

  const gaugeEl = root.querySelector<HTMLElement>("#gauge")!;
  const chatEl = root.querySelector<HTMLElement>("#chat")!;
  const reviewEl = root.querySelector<HTMLElement>("#review")!;
  const composer = root.querySelector<HTMLFormElement>("#composer")!;
  const textInput = root.querySelector<HTMLInputElement>("#composer-text")!;
  const sendButton = root.querySelector<HTMLButtonElement>("#composer-send")!;
  const chatView = root.querySelector<HTMLElement>("#view-chat")!;
  const dashboardView = root.querySelector<HTMLElement>("#view-dashboard")!;
  const chatTab = root.querySelector<HTMLButtonElement>("#tab-chat")!;
  const dashboardTab = root.querySelector<HTMLButtonElement>("#tab-dashboard")!;

  const handlers = {
    onResolve: (id: string, verdict: "confirmed" | "relabeled", label?: "hate" | "abusive" | "neither") => {
      void resolveItem(store, api, id, verdict, label);
    },
    onRetrain: (language: "en" | "hi" | "hi_codemix") => {
      void triggerRetrain(store, api, language);
    },
  };

  store.subscribe((state) => {
    renderGauge(gaugeEl, state);
    renderChat(chatEl, store);
    renderReview(reviewEl, store, handlers);
    sendButton.disabled = state.apiDown;
  });

  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = textInput.value;
    void submitWithNotifier(store, api, text).then((outcome) => {
      if (outcome === "posted") textInput.value = "";
    });
  });

  function showView(view: "chat" | "dashboard"): void {
    chatView.hidden = view !== "chat";
    dashboardView.hidden = view !== "dashboard";
    chatTab.classList.toggle("active", view === "chat");
    dashboardTab.classList.toggle("active", view === "dashboard");
  }
  chatTab.addEventListener("click", () => showView("chat"));
  dashboardTab.addEventListener("click", () => showView("dashboard"));

  async function poll(): Promise<void> {
    await refreshPageScore(store, api);
    await loadReviewQueue(store, api);
    try {
      store.setModels(await api.models());
    } catch (error) {
      if (error instanceof ApiUnreachableError) {
        store.setApiDown(true);
      }
      // other errors already surface through the review/banner paths
    }
  }

  void poll();
  const timer = setInterval(() => void poll(), POLL_INTERVAL_MS);

  // initial paint
  renderGauge(gaugeEl, store.state);
  renderChat(chatEl, store);
  renderReview(reviewEl, store, handlers);

  return () => clearInterval(timer);
}

const rootEl = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootEl) {
  startApp(rootEl);
}
