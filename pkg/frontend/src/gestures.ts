/**
 * Gesture-to-op translation.
 *
 * Every mutating gesture in the cluster view maps to exactly one
 * demonstration op; this module is that mapping, pure and stateless, so
 * the test harness can compare its output against the server's op log
 * one to one.
 */

import type { DemonstrationOp } from "./types";

export type Gesture =
  | { kind: "drag_selection_to_canvas"; items: number[] }
  | { kind: "lasso_split"; items: number[] }
  | { kind: "drag_cluster_onto_cluster"; source: number; target: number }
  | { kind: "drag_items_to_trash"; items: number[] }
  | { kind: "drag_cluster_to_trash"; clusterId: number }
  | { kind: "set_weight_sliders"; weights: Record<string, number> };

export function gestureToOp(gesture: Gesture): DemonstrationOp {
  switch (gesture.kind) {
    case "drag_selection_to_canvas":
      return { kind: "create_from_selection", payload: { items: gesture.items } };
    case "lasso_split":
      return { kind: "split_out", payload: { items: gesture.items } };
    case "drag_cluster_onto_cluster":
      return { kind: "merge", payload: { a: gesture.source, b: gesture.target } };
    case "drag_items_to_trash":
      return { kind: "remove_items", payload: { items: gesture.items } };
    case "drag_cluster_to_trash":
      return { kind: "remove_cluster", payload: { cluster_id: gesture.clusterId } };
    case "set_weight_sliders":
      return { kind: "set_weights", payload: { weights: gesture.weights } };
  }
}

export interface GestureLogEntry {
  gesture: Gesture;
  op: DemonstrationOp;
}
