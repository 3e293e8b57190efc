// Narrow interface the panels use to talk back to the app shell, so a
// panel never reaches into another panel or the network directly.

import type { XY } from "./geometry";

export interface PanelActions {
  cellClick(itemId: number, column: string, intersect: boolean): Promise<void>;
  dragSelectionToCanvas(): Promise<void>;
  lassoSplit(polygon: XY[]): Promise<void>;
  mergeClusters(source: number, target: number): Promise<void>;
  removeCluster(clusterId: number): Promise<void>;
  removeSelection(): Promise<void>;
  applyRecommendation(rank: number): Promise<void>;
  refreshRecommendations(): Promise<void>;
  openSubpanel(clusterId: number, feature: string, rotate: boolean): Promise<void>;
  runCluster(): Promise<void>;
  setDesiredK(k: number | null): void;
  setFeatureEnabled(column: string, enabled: boolean): void;
  setFeatureWeight(column: string, weight: number): void;
  loadTablePage(offset: number): Promise<void>;
  rowValues(itemId: number): Promise<Record<string, string>>;
}
