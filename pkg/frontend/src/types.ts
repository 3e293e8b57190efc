// Wire types, mirroring the service's JSON bodies field for field.

export interface ColumnInfo {
  name: string;
  kind: string;
  missing_count: number;
  minimum: number | null;
  maximum: number | null;
  categories: string[] | null;
}

export interface SessionCreated {
  session_id: string;
  n_rows: number;
  columns: ColumnInfo[];
}

export interface TableRow {
  item_id: number;
  values: Record<string, string>;
}

export interface TablePage {
  rows: TableRow[];
  total: number;
  offset: number;
  limit: number;
}

export interface Selection {
  item_ids: number[];
  provenance: string;
}

export interface ClusterOut {
  cluster_id: number;
  color_tag: number;
  origin: string;
  members: number[];
}

export interface Layout {
  clusters: ClusterOut[];
  deleted_items: number[];
  unassigned_items: number[];
  n_rows: number;
}

export interface Point {
  item_id: number;
  cluster_id: number;
  x: number;
  y: number;
}

export interface Anchor {
  cluster_id: number;
  x: number;
  y: number;
  radius: number;
}

export interface Coords {
  points: Point[];
  anchors: Anchor[];
}

export interface Candidate {
  algorithm: string;
  hyperparameters: Record<string, unknown>;
  seed: number;
}

export interface Metrics {
  silhouette: number | null;
  davies_bouldin: number | null;
  homogeneity: number | null;
  adjusted_rand: number | null;
  fowlkes_mallows: number | null;
  nmi: number | null;
  score: number;
}

export interface Description {
  n_clusters: number;
  top_features: string[];
  cluster_sizes: number[];
  sentence: string;
}

export interface ModelResult {
  rank: number;
  candidate: Candidate;
  metrics: Metrics;
  description: Description;
  mismatch: boolean;
  clusters: number[][];
  noise: number[];
}

export interface Recommendations {
  generation: number;
  stale: boolean;
  mismatch: boolean;
  current_shown: ModelResult;
  ranked: ModelResult[];
}

export interface Pending {
  status: string;
  latest_request: number;
}

export interface DemonstrationOp {
  kind: string;
  payload: Record<string, unknown>;
}

export interface OpResponse {
  generation: number;
  noop: boolean;
  cluster_id: number | null;
  scheduled_generation: number | null;
  layout: Layout;
  coords: Coords | null;
}

export interface ClusterResponse {
  generation: number;
  layout: Layout;
  coords: Coords;
}

export interface ApplyResponse {
  generation: number;
  rank: number;
  layout: Layout;
  coords: Coords;
}

export interface Histogram {
  feature: string;
  kind: string;
  counts: number[];
  bin_edges: number[] | null;
  categories: string[] | null;
}

export interface Subcluster {
  parent_cluster: number;
  algorithm: string;
  hyperparameters: Record<string, unknown>;
  refresh_count: number;
  groups: number[][];
  noise: number[];
  histogram: Histogram;
}

export interface OpLogEntry {
  kind: string;
  payload: Record<string, unknown>;
  timestamp: number;
}

export interface OpLog {
  ops: OpLogEntry[];
}
