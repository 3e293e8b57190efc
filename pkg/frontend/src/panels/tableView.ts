/**
 * Table View: a pageable grid of the raw rows. Clicking a cell selects
 * every row sharing that value (shift-click intersects with the current
 * selection); the selection chip is the drag handle that carries the
 * rows over to the Cluster View.
 */

import type { PanelActions } from "../actions";
import type { ViewState } from "../state";

export function renderTableView(
  container: HTMLElement,
  state: ViewState,
  actions: PanelActions,
): void {
  const page = state.tablePage;
  if (!page) {
    container.innerHTML = `<div class="empty-state">Loading rows&hellip;</div>`;
    return;
  }
  const columns = state.columns.map((c) => c.name);
  const selected = new Set(state.selection);

  const head = columns.map((name) => `<th>${name}</th>`).join("");
  const body = page.rows
    .map((row) => {
      const cells = columns
        .map(
          (name) =>
            `<td data-item="${row.item_id}" data-column="${name}">` +
            `${row.values[name] ?? ""}</td>`,
        )
        .join("");
      const cls = selected.has(row.item_id) ? ' class="row-selected"' : "";
      return `<tr data-item="${row.item_id}"${cls}>${cells}</tr>`;
    })
    .join("");

  const chip =
    state.selection.length > 0
      ? `<button id="selection-chip" draggable="true">
           ${state.selection.length} selected (${state.selectionProvenance ?? "manual"})
           &mdash; drag to cluster view</button>`
      : "";
  const prevOffset = Math.max(0, page.offset - page.limit);
  const nextOffset = page.offset + page.limit;

  container.innerHTML = `
    <div class="table-toolbar">
      <button id="page-prev" ${page.offset === 0 ? "disabled" : ""}>&laquo;</button>
      <span>rows ${page.offset}&ndash;${Math.min(page.offset + page.limit, page.total) - 1}
        of ${page.total}</span>
      <button id="page-next" ${nextOffset >= page.total ? "disabled" : ""}>&raquo;</button>
      ${chip}
    </div>
    <table class="data-table">
      <thead><tr>${head}</tr></thead>
      <tbody>${body}</tbody>
    </table>`;

  container.querySelector("#page-prev")?.addEventListener("click", () => {
    void actions.loadTablePage(prevOffset);
  });
  container.querySelector("#page-next")?.addEventListener("click", () => {
    void actions.loadTablePage(nextOffset);
  });

  container.querySelectorAll<HTMLTableCellElement>("td[data-item]").forEach((cell) => {
    cell.addEventListener("click", (event) => {
      const itemId = Number(cell.getAttribute("data-item"));
      const column = cell.getAttribute("data-column")!;
      void actions.cellClick(itemId, column, (event as MouseEvent).shiftKey);
    });
  });

  const handle = container.querySelector<HTMLElement>("#selection-chip");
  if (handle) {
    // Real drags come through dragend over the canvas; the click fallback
    // keeps the gesture reachable for keyboard users.
    handle.addEventListener("click", () => void actions.dragSelectionToCanvas());
  }
}
