/**
 * Sub-cluster panels. Each open panel shows the parent cluster's
 * internal grouping plus a bar chart of one feature's distribution over
 * the parent's members; two panels side by side support the compare
 * workflow.
 */

import type { PanelActions } from "../actions";
import { colorFor } from "../colors";
import type { Subcluster } from "../types";
import type { ViewState } from "../state";

function barChart(model: Subcluster): string {
  const hist = model.histogram;
  const peak = Math.max(1, ...hist.counts);
  const barWidth = 1 / Math.max(1, hist.counts.length);
  const bars = hist.counts
    .map((count, i) => {
      const height = 0.8 * (count / peak);
      const label =
        hist.categories?.[i] ??
        (hist.bin_edges ? hist.bin_edges[i]?.toFixed(1) : String(i));
      return `
        <rect class="bar" data-count="${count}" x="${(i * barWidth).toFixed(3)}"
              y="${(0.85 - height).toFixed(3)}" width="${(barWidth * 0.9).toFixed(3)}"
              height="${height.toFixed(3)}" fill="#6b8cae">
          <title>${label}: ${count}</title>
        </rect>`;
    })
    .join("");
  return `<svg class="subpanel-chart" viewBox="0 0 1 1">${bars}</svg>`;
}

function groupSummary(model: Subcluster): string {
  return model.groups
    .map(
      (members, i) =>
        `<span class="subgroup" style="color:${colorFor(i)}">` +
        `${members.length}</span>`,
    )
    .join(" / ");
}

export function renderSubPanels(
  container: HTMLElement,
  state: ViewState,
  actions: PanelActions,
): void {
  if (state.subpanels.length === 0) {
    container.innerHTML = "";
    return;
  }
  const numericColumns = state.columns.filter((c) => c.kind === "numeric");
  const panels = state.subpanels
    .map((model) => {
      const options = numericColumns
        .map(
          (c) =>
            `<option value="${c.name}" ${
              c.name === model.histogram.feature ? "selected" : ""
            }>${c.name}</option>`,
        )
        .join("");
      return `
        <div class="subpanel" data-cluster="${model.parent_cluster}">
          <div class="subpanel-head">
            cluster ${model.parent_cluster}: ${model.algorithm} sub-groups
            (${groupSummary(model)})
            <button class="subpanel-reroll" data-cluster="${model.parent_cluster}"
              title="try another sub-grouping">another</button>
          </div>
          <select class="subpanel-feature" data-cluster="${model.parent_cluster}">
            ${options}
          </select>
          ${barChart(model)}
        </div>`;
    })
    .join("");
  container.innerHTML = `<div class="subpanel-strip">${panels}</div>`;

  container.querySelectorAll<HTMLSelectElement>(".subpanel-feature").forEach((sel) => {
    sel.addEventListener("change", () => {
      const clusterId = Number(sel.getAttribute("data-cluster"));
      void actions.openSubpanel(clusterId, sel.value, false);
    });
  });
  container.querySelectorAll<HTMLElement>(".subpanel-reroll").forEach((btn) => {
    btn.addEventListener("click", () => {
      const clusterId = Number(btn.getAttribute("data-cluster"));
      const open = state.subpanels.find((m) => m.parent_cluster === clusterId);
      void actions.openSubpanel(clusterId, open?.histogram.feature ?? "", true);
    });
  });
}
