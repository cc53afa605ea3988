/**
 * Page-score gauge: three class segments whose numbers come from the
 * /page/score payload verbatim — no client-side arithmetic on them.
 */

import { UiState } from "./state.js";
import { LABELS } from "./types.js";

export function renderGauge(container: HTMLElement, state: UiState): void {
  container.innerHTML = "";

  if (state.banner) {
    const banner = document.createElement("div");
    banner.className = "banner error";
    banner.setAttribute("data-testid", "gauge-banner");
    banner.textContent = state.banner;
    container.appendChild(banner);
    // fall through: stale gauge data stays visible below the banner
  }

  const score = state.pageScore;
  if (!score || score.total === 0) {
    const empty = document.createElement("p");
    empty.className = "gauge-empty";
    empty.setAttribute("data-testid", "gauge-empty");
    empty.textContent = "no comments";
    container.appendChild(empty);
    return;
  }

  const bar = document.createElement("div");
  bar.className = "gauge-bar";
  const legend = document.createElement("ul");
  legend.className = "gauge-legend";

  for (const label of LABELS) {
    const value = score.percentages[label];
    const segment = document.createElement("div");
    segment.className = `gauge-segment ${label}`;
    segment.setAttribute("data-testid", `gauge-${label}`);
    segment.style.width = `${value}%`;
    segment.title = `${label} ${value}%`;
    bar.appendChild(segment);

    const item = document.createElement("li");
    item.setAttribute("data-testid", `legend-${label}`);
    item.textContent = `${label} ${value}%`;
    legend.appendChild(item);
  }

  const total = document.createElement("p");
  total.className = "gauge-total";
  total.textContent = `${score.total} comment${score.total === 1 ? "" : "s"} scored`;

  container.appendChild(bar);
  container.appendChild(legend);
  container.appendChild(total);
}
