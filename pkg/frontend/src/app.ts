/**
 * App shell: owns the view state, serializes mutating requests, and
 * re-renders the four panels after every server response.
 *
 * Concurrency contract: at most one mutating request is in flight;
 * gestures queue behind it. Background searches are picked up by
 * polling and parked behind a notification badge, never auto-swapped
 * into the panel.
 */

import type { PanelActions } from "./actions";
import { ApiClient } from "./api";
import { gestureToOp, type Gesture, type GestureLogEntry } from "./gestures";
import { lassoHits, type XY } from "./geometry";
import {
  applyLayout,
  featureSelection,
  initialState,
  type ViewState,
} from "./state";
import { renderAttributePanel } from "./panels/attributePanel";
import { renderClusterView } from "./panels/clusterView";
import { renderRecommendationPanel } from "./panels/recommendationPanel";
import { renderSubPanels } from "./panels/subPanel";
import { renderTableView } from "./panels/tableView";
import type { Recommendations, SessionCreated } from "./types";

const POLL_INTERVAL_MS = 150;
const POLL_LIMIT_MS = 60_000;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class App implements PanelActions {
  readonly state: ViewState;
  readonly gestureLog: GestureLogEntry[] = [];

  private readonly panels: {
    table: HTMLElement;
    cluster: HTMLElement;
    recs: HTMLElement;
    attributes: HTMLElement;
    sub: HTMLElement;
  };
  private queue: Promise<unknown> = Promise.resolve();
  private polls = new Set<Promise<void>>();
  private rowCache = new Map<number, Record<string, string>>();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    session: SessionCreated,
  ) {
    this.state = initialState(session.session_id, session.columns, session.n_rows);
    root.innerHTML = `
      <div class="layout-grid">
        <section id="cluster-panel" class="panel"></section>
        <section id="recs-panel" class="panel"></section>
        <section id="table-panel" class="panel"></section>
        <section id="attr-panel" class="panel"></section>
        <section id="sub-panel" class="panel-wide"></section>
      </div>`;
    this.panels = {
      cluster: root.querySelector("#cluster-panel")!,
      recs: root.querySelector("#recs-panel")!,
      table: root.querySelector("#table-panel")!,
      attributes: root.querySelector("#attr-panel")!,
      sub: root.querySelector("#sub-panel")!,
    };
    this.render();
  }

  static async open(root: HTMLElement, api: ApiClient, csv: string): Promise<App> {
    const session = await api.createSession(csv);
    const app = new App(root, api, session);
    await app.loadTablePage(0);
    return app;
  }

  /** Resolves when every queued gesture and active poll has finished. */
  async settled(): Promise<void> {
    // New work may be scheduled by the work we wait on, so drain until
    // a full pass finds nothing in flight.
    for (;;) {
      const queue = this.queue;
      const polls = [...this.polls];
      await queue.catch(() => undefined);
      await Promise.all(polls.map((p) => p.catch(() => undefined)));
      const unchanged =
        this.queue === queue && [...this.polls].every((p) => polls.includes(p));
      if (unchanged) {
        return;
      }
    }
  }

  render(): void {
    renderTableView(this.panels.table, this.state, this);
    renderClusterView(this.panels.cluster, this.state, this);
    renderRecommendationPanel(this.panels.recs, this.state, this);
    renderAttributePanel(this.panels.attributes, this.state, this);
    renderSubPanels(this.panels.sub, this.state, this);
  }

  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const run = this.queue.then(work);
    this.queue = run.then(
      () => undefined,
      () => undefined,
    );
    return run;
  }

  // -- gestures ---------------------------------------------------------

  private dispatchGesture(gesture: Gesture): Promise<void> {
    const op = gestureToOp(gesture);
    this.gestureLog.push({ gesture, op });
    return this.enqueue(async () => {
      const response = await this.api.submitOp(
        this.state.sessionId,
        op,
        this.state.generation || null,
      );
      applyLayout(this.state, response.generation, response.layout, response.coords);
      if (response.scheduled_generation !== null) {
        this.startPoll(response.scheduled_generation);
      }
      this.render();
    });
  }

  async cellClick(itemId: number, column: string, intersect: boolean): Promise<void> {
    const selection = await this.api.selectSimilar(
      this.state.sessionId,
      itemId,
      column,
      intersect && this.state.selection.length > 0 ? this.state.selection : undefined,
    );
    this.state.selection = selection.item_ids;
    this.state.selectionProvenance = selection.provenance;
    this.render();
  }

  dragSelectionToCanvas(): Promise<void> {
    const items = [...this.state.selection];
    if (items.length === 0) {
      return Promise.resolve();
    }
    this.state.selection = [];
    this.state.selectionProvenance = null;
    return this.dispatchGesture({ kind: "drag_selection_to_canvas", items });
  }

  lassoSplit(polygon: XY[]): Promise<void> {
    const coords = this.state.coords;
    if (!coords) {
      return Promise.resolve();
    }
    const items = lassoHits(coords.points, polygon);
    if (items.length === 0) {
      return Promise.resolve(); // lasso caught nothing: gesture canceled
    }
    return this.dispatchGesture({ kind: "lasso_split", items });
  }

  mergeClusters(source: number, target: number): Promise<void> {
    if (source === target) {
      return Promise.resolve();
    }
    return this.dispatchGesture({
      kind: "drag_cluster_onto_cluster",
      source,
      target,
    });
  }

  removeCluster(clusterId: number): Promise<void> {
    return this.dispatchGesture({ kind: "drag_cluster_to_trash", clusterId });
  }

  removeSelection(): Promise<void> {
    const items = [...this.state.selection];
    if (items.length === 0) {
      return Promise.resolve();
    }
    this.state.selection = [];
    return this.dispatchGesture({ kind: "drag_items_to_trash", items });
  }

  // -- recommendations --------------------------------------------------

  private startPoll(generation: number): void {
    this.state.pendingGeneration = generation;
    this.render();
    const poll = this.runPoll(generation).finally(() => {
      this.polls.delete(poll);
    });
    this.polls.add(poll);
  }

  private async runPoll(generation: number): Promise<void> {
    const deadline = Date.now() + POLL_LIMIT_MS;
    while (Date.now() < deadline) {
      const result = await this.api.recommendations(this.state.sessionId, generation);
      if (result.status === 200 && result.recs) {
        if (this.state.pendingGeneration === generation) {
          this.state.freshRecs = result.recs;
          this.render();
        }
        return;
      }
      await sleep(POLL_INTERVAL_MS);
    }
    throw new Error(`search generation ${generation} never finished`);
  }

  async refreshRecommendations(): Promise<void> {
    if (this.state.freshRecs) {
      this.installRecs(this.state.freshRecs);
      this.state.freshRecs = null;
      this.state.pendingGeneration = null;
      this.render();
    }
  }

  private installRecs(recs: Recommendations): void {
    this.state.recs = recs;
    this.state.generation = Math.max(this.state.generation, recs.generation);
  }

  applyRecommendation(rank: number): Promise<void> {
    return this.enqueue(async () => {
      const response = await this.api.applyRecommendation(this.state.sessionId, rank);
      applyLayout(this.state, response.generation, response.layout, response.coords);
      const poll = await this.api.recommendations(
        this.state.sessionId,
        response.generation,
      );
      if (poll.recs) {
        this.installRecs(poll.recs);
      }
      this.render();
    });
  }

  runCluster(): Promise<void> {
    return this.enqueue(async () => {
      const { features, weights } = featureSelection(this.state);
      const response = await this.api.runCluster(this.state.sessionId, {
        features,
        weights,
        desiredK: this.state.desiredK ?? undefined,
      });
      applyLayout(this.state, response.generation, response.layout, response.coords);
      const poll = await this.api.recommendations(
        this.state.sessionId,
        response.generation,
      );
      if (poll.recs) {
        this.installRecs(poll.recs);
      }
      this.state.pendingGeneration = null;
      this.state.freshRecs = null;
      this.render();
    });
  }

  // -- subpanels, table, attributes -------------------------------------

  async openSubpanel(clusterId: number, feature: string, rotate: boolean): Promise<void> {
    const model = await this.api.subcluster(
      this.state.sessionId,
      clusterId,
      feature,
      rotate,
    );
    const existing = this.state.subpanels.findIndex(
      (m) => m.parent_cluster === clusterId,
    );
    if (existing >= 0) {
      this.state.subpanels[existing] = model;
    } else {
      this.state.subpanels.push(model);
    }
    this.render();
  }

  setDesiredK(k: number | null): void {
    this.state.desiredK = k;
  }

  setFeatureEnabled(column: string, enabled: boolean): void {
    this.state.enabled[column] = enabled;
    this.render();
  }

  setFeatureWeight(column: string, weight: number): void {
    this.state.weights[column] = weight;
  }

  async loadTablePage(offset: number): Promise<void> {
    const page = await this.api.tablePage(this.state.sessionId, offset);
    this.state.tablePage = page;
    for (const row of page.rows) {
      this.rowCache.set(row.item_id, row.values);
    }
    this.render();
  }

  async rowValues(itemId: number): Promise<Record<string, string>> {
    const hit = this.rowCache.get(itemId);
    if (hit) {
      return hit;
    }
    // Row ids are row order, so a one-row page at offset=itemId is exact.
    const page = await this.api.tablePage(this.state.sessionId, itemId, 1);
    const row = page.rows[0];
    if (!row) {
      return {};
    }
    this.rowCache.set(row.item_id, row.values);
    return row.values;
  }

  async exportCsv(): Promise<string> {
    return this.api.exportCsv(this.state.sessionId);
  }

  /** Snapshot of the cluster view as an image data URL. */
  exportImage(): string {
    const svg = this.root.querySelector("#cluster-canvas");
    const markup = svg ? svg.outerHTML : "<svg></svg>";
    return "data:image/svg+xml;base64," + btoa(unescape(encodeURIComponent(markup)));
  }
}
