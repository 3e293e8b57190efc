/**
 * Recommendation Panel: one thumbnail per ranked model. Each thumbnail
 * is a miniature scatter of that model's partition plus the server's
 * description sentence; clicking it loads the model into the Cluster
 * View. While a newer search is still running, a badge invites the user
 * to refresh instead of the panel swapping content under them.
 */

import type { PanelActions } from "../actions";
import { colorFor } from "../colors";
import type { ModelResult } from "../types";
import { hasFreshRecommendations, type ViewState } from "../state";

/**
 * Tiny deterministic scatter for a thumbnail: cluster centers equally
 * spaced on a ring, members dotted in rings around their center. Purely
 * decorative, but stable for a given partition.
 */
export function thumbnailDots(
  result: ModelResult,
): Array<{ x: number; y: number; color: string }> {
  const dots: Array<{ x: number; y: number; color: string }> = [];
  const k = result.clusters.length;
  result.clusters.forEach((members, index) => {
    const angle = (2 * Math.PI * index) / Math.max(k, 1);
    const cx = 0.5 + 0.3 * Math.cos(angle);
    const cy = 0.5 + 0.3 * Math.sin(angle);
    const color = colorFor(index);
    members.forEach((_, m) => {
      const ring = Math.floor(m / 8) + 1;
      const theta = (2 * Math.PI * (m % 8)) / 8 + ring;
      dots.push({
        x: cx + 0.035 * ring * Math.cos(theta),
        y: cy + 0.035 * ring * Math.sin(theta),
        color,
      });
    });
  });
  for (let i = 0; i < result.noise.length; i++) {
    dots.push({ x: 0.05 + 0.02 * (i % 10), y: 0.95, color: "#c7c7c7" });
  }
  return dots;
}

function thumbnailSvg(result: ModelResult): string {
  const dots = thumbnailDots(result)
    .map(
      (d) =>
        `<circle cx="${d.x.toFixed(3)}" cy="${d.y.toFixed(3)}" r="0.02" fill="${d.color}"></circle>`,
    )
    .join("");
  return `<svg viewBox="0 0 1 1" class="thumb-scatter">${dots}</svg>`;
}

export function renderRecommendationPanel(
  container: HTMLElement,
  state: ViewState,
  actions: PanelActions,
): void {
  const recs = state.recs;
  const freshBadge = hasFreshRecommendations(state)
    ? `<button id="recs-refresh" class="badge">new recommendations available</button>`
    : "";
  const pendingNote =
    state.pendingGeneration !== null && state.freshRecs === null
      ? `<div class="pending-note" id="recs-pending">searching&hellip;</div>`
      : "";

  if (!recs) {
    const filler =
      freshBadge || pendingNote || '<div class="empty-state">No recommendations yet.</div>';
    container.innerHTML = `
      <h3>Recommendations</h3>
      ${filler}`;
    container
      .querySelector<HTMLElement>("#recs-refresh")
      ?.addEventListener("click", () => void actions.refreshRecommendations());
    return;
  }

  const items = recs.ranked
    .map((result) => {
      const conflict = result.mismatch
        ? `<span class="conflict-badge" title="does not honor the demonstration">!</span>`
        : "";
      return `
        <li class="thumbnail" data-rank="${result.rank}">
          ${thumbnailSvg(result)}
          <div class="thumb-sentence">${result.description.sentence}${conflict}</div>
        </li>`;
    })
    .join("");

  container.innerHTML = `
    <h3>Recommendations</h3>
    ${freshBadge}
    ${pendingNote}
    <ul class="thumbnail-list">${items}</ul>`;

  container.querySelectorAll<HTMLElement>(".thumbnail").forEach((el) => {
    el.addEventListener("click", () => {
      const rank = Number(el.getAttribute("data-rank"));
      void actions.applyRecommendation(rank);
    });
  });
  const refresh = container.querySelector<HTMLElement>("#recs-refresh");
  if (refresh) {
    refresh.addEventListener("click", () => void actions.refreshRecommendations());
  }
}
