/**
 * Cluster View: the spatial workspace. Item circles sit inside padded
 * convex hulls, one hull per cluster; the unclustered pool renders as
 * plain gray circles. Drag a hull onto another hull to merge, lasso
 * circles to split them out, drop things on the trash to remove them.
 */

import type { PanelActions } from "../actions";
import { UNCLUSTERED_COLOR, colorFor } from "../colors";
import { convexHull, padHull, type XY } from "../geometry";
import type { ViewState } from "../state";

const CIRCLE_R = 0.012;

function svgPath(points: XY[]): string {
  if (points.length === 0) {
    return "";
  }
  const parts = points.map(
    (p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(4)},${p.y.toFixed(4)}`,
  );
  return parts.join(" ") + " Z";
}

export function renderClusterView(
  container: HTMLElement,
  state: ViewState,
  actions: PanelActions,
): void {
  const { layout, coords } = state;
  if (!layout || !coords || layout.clusters.length === 0) {
    container.innerHTML = `
      <div class="empty-state">
        Drag table rows here, or press Cluster, to see a layout.
      </div>`;
    return;
  }

  const colorByCluster = new Map<number, string>();
  for (const cluster of layout.clusters) {
    colorByCluster.set(cluster.cluster_id, colorFor(cluster.color_tag));
  }

  const hulls = layout.clusters
    .map((cluster) => {
      const members = coords.points.filter((p) => p.cluster_id === cluster.cluster_id);
      const outline = padHull(
        convexHull(members.map((p) => ({ x: p.x, y: p.y }))),
        CIRCLE_R * 1.5,
      );
      const color = colorByCluster.get(cluster.cluster_id)!;
      return `
        <g class="hull" data-cluster="${cluster.cluster_id}">
          <path d="${svgPath(outline)}" fill="${color}" fill-opacity="0.12"
                stroke="${color}" stroke-width="0.004"></path>
          <text class="hull-label" x="${outline[0]?.x ?? 0}" y="${outline[0]?.y ?? 0}"
                font-size="0.025" fill="${color}">${cluster.cluster_id}</text>
        </g>`;
    })
    .join("");

  const circles = coords.points
    .map((p) => {
      const color =
        p.cluster_id < 0
          ? UNCLUSTERED_COLOR
          : (colorByCluster.get(p.cluster_id) ?? UNCLUSTERED_COLOR);
      return `<circle class="item" data-item="${p.item_id}" data-cluster="${p.cluster_id}"
        cx="${p.x.toFixed(4)}" cy="${p.y.toFixed(4)}" r="${CIRCLE_R}" fill="${color}"></circle>`;
    })
    .join("");

  const subButtons = layout.clusters
    .map((cluster) => {
      const anchor = coords.anchors.find((a) => a.cluster_id === cluster.cluster_id);
      if (!anchor) {
        return "";
      }
      return `<text class="sub-btn" data-cluster="${cluster.cluster_id}"
        x="${anchor.x.toFixed(4)}" y="${(anchor.y - anchor.radius).toFixed(4)}"
        font-size="0.03">+</text>`;
    })
    .join("");

  container.innerHTML = `
    <div class="cluster-toolbar">
      <label>k
        <input type="range" id="k-slider" min="2" max="10"
               value="${state.desiredK ?? 3}">
        <span id="k-value">${state.desiredK ?? "auto"}</span>
      </label>
      <button id="cluster-btn">Cluster</button>
      <span id="trash" class="trash" title="drop here to remove">&#128465;</span>
    </div>
    <svg id="cluster-canvas" viewBox="0 0 1 1" preserveAspectRatio="xMidYMid meet">
      ${hulls}
      ${circles}
      ${subButtons}
    </svg>
    <div id="tooltip" class="tooltip" hidden></div>`;

  const canvas = container.querySelector<SVGSVGElement>("#cluster-canvas")!;
  const tooltip = container.querySelector<HTMLElement>("#tooltip")!;

  // Hover on a circle lists the item's full attribute record.
  canvas.addEventListener("mouseover", (event) => {
    const target = event.target as Element;
    if (!target.classList.contains("item")) {
      return;
    }
    const itemId = Number(target.getAttribute("data-item"));
    void actions.rowValues(itemId).then((values) => {
      const lines = Object.entries(values)
        .map(([name, value]) => `<div><b>${name}</b>: ${value}</div>`)
        .join("");
      tooltip.innerHTML = `<div><b>item ${itemId}</b></div>${lines}`;
      tooltip.hidden = false;
    });
  });
  canvas.addEventListener("mouseout", () => {
    tooltip.hidden = true;
  });

  canvas.addEventListener("click", (event) => {
    const target = event.target as Element;
    if (target.classList.contains("sub-btn")) {
      const clusterId = Number(target.getAttribute("data-cluster"));
      const numeric = state.columns.find((c) => c.kind === "numeric");
      void actions.openSubpanel(clusterId, numeric ? numeric.name : "", true);
    }
  });

  const slider = container.querySelector<HTMLInputElement>("#k-slider")!;
  slider.addEventListener("change", () => {
    actions.setDesiredK(Number(slider.value));
  });
  container.querySelector<HTMLButtonElement>("#cluster-btn")!.addEventListener(
    "click",
    () => void actions.runCluster(),
  );
}
