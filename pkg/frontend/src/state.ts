/**
 * Client view state. Everything the four panels render lives here, and
 * all of it is either copied from the last server response or local
 * widget state (sliders, selection). Reload = refetch = same view.
 */

import type {
  ColumnInfo,
  Coords,
  Layout,
  Recommendations,
  Subcluster,
  TablePage,
} from "./types";

export interface ViewState {
  sessionId: string;
  columns: ColumnInfo[];
  nRows: number;
  /** Generation of the newest layout/recs the client has seen. */
  generation: number;
  layout: Layout | null;
  coords: Coords | null;
  selection: number[];
  selectionProvenance: string | null;
  /** What the recommendation panel is currently showing. */
  recs: Recommendations | null;
  /**
   * A finished search the user has not looked at yet. The panel never
   * swaps content on its own; it shows a notification badge and waits.
   */
  freshRecs: Recommendations | null;
  /** Generation of a search still running server-side, if any. */
  pendingGeneration: number | null;
  tablePage: TablePage | null;
  desiredK: number | null;
  weights: Record<string, number>;
  enabled: Record<string, boolean>;
  /** Open sub-cluster panels, in open order (side-by-side comparison). */
  subpanels: Subcluster[];
}

export function initialState(
  sessionId: string,
  columns: ColumnInfo[],
  nRows: number,
): ViewState {
  const weights: Record<string, number> = {};
  const enabled: Record<string, boolean> = {};
  for (const column of columns) {
    weights[column.name] = 1;
    enabled[column.name] = true;
  }
  return {
    sessionId,
    columns,
    nRows,
    generation: 0,
    layout: null,
    coords: null,
    selection: [],
    selectionProvenance: null,
    recs: null,
    freshRecs: null,
    pendingGeneration: null,
    tablePage: null,
    desiredK: null,
    weights,
    enabled,
    subpanels: [],
  };
}

export function applyLayout(
  state: ViewState,
  generation: number,
  layout: Layout,
  coords: Coords | null,
): void {
  state.generation = Math.max(state.generation, generation);
  state.layout = layout;
  state.coords = coords;
  // Any open subpanel was computed for the previous layout.
  state.subpanels = [];
}

/** True when a finished search is waiting behind the notification badge. */
export function hasFreshRecommendations(state: ViewState): boolean {
  return state.freshRecs !== null;
}

export function featureSelection(state: ViewState): {
  features: string[];
  weights: number[];
} {
  const features: string[] = [];
  const weights: number[] = [];
  for (const column of state.columns) {
    if (state.enabled[column.name]) {
      features.push(column.name);
      weights.push(state.weights[column.name] ?? 1);
    }
  }
  return { features, weights };
}
