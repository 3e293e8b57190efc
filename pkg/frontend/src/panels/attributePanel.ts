// Attribute Panel: per-column toggle + weight slider. Weight 0 and an
// unchecked box mean the same thing to the engine; the checkbox is the
// coarse control, the slider the fine one.

import type { PanelActions } from "../actions";
import type { ViewState } from "../state";

export function renderAttributePanel(
  container: HTMLElement,
  state: ViewState,
  actions: PanelActions,
): void {
  const rows = state.columns
    .map((column) => {
      const enabled = state.enabled[column.name] ?? true;
      const weight = state.weights[column.name] ?? 1;
      const range =
        column.kind === "numeric"
          ? `${column.minimum ?? "?"} to ${column.maximum ?? "?"}`
          : `${column.categories?.length ?? 0} categories`;
      return `
        <div class="attribute-row" data-column="${column.name}">
          <label>
            <input type="checkbox" class="attr-toggle" ${enabled ? "checked" : ""}>
            <span class="attr-name">${column.name}</span>
            <span class="attr-kind">${column.kind}, ${range}</span>
          </label>
          <input type="range" class="attr-weight" min="0" max="3" step="0.1"
                 value="${weight}" ${enabled ? "" : "disabled"}>
          <span class="attr-weight-value">${weight.toFixed(1)}</span>
        </div>`;
    })
    .join("");

  container.innerHTML = `
    <h3>Attributes</h3>
    ${rows}
    <button id="attr-apply">Cluster with these features</button>`;

  container.querySelectorAll<HTMLElement>(".attribute-row").forEach((row) => {
    const column = row.getAttribute("data-column")!;
    const toggle = row.querySelector<HTMLInputElement>(".attr-toggle")!;
    const slider = row.querySelector<HTMLInputElement>(".attr-weight")!;
    toggle.addEventListener("change", () => {
      actions.setFeatureEnabled(column, toggle.checked);
    });
    slider.addEventListener("change", () => {
      actions.setFeatureWeight(column, Number(slider.value));
    });
  });
  container
    .querySelector<HTMLButtonElement>("#attr-apply")!
    .addEventListener("click", () => void actions.runCluster());
}
