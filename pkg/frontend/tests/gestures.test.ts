import { describe, expect, it } from "vitest";
import { gestureToOp, type Gesture } from "../src/gestures";

describe("gestureToOp", () => {
  const cases: Array<[Gesture, { kind: string; payload: Record<string, unknown> }]> = [
    [
      { kind: "drag_selection_to_canvas", items: [3, 1, 2] },
      { kind: "create_from_selection", payload: { items: [3, 1, 2] } },
    ],
    [
      { kind: "lasso_split", items: [7, 8] },
      { kind: "split_out", payload: { items: [7, 8] } },
    ],
    [
      { kind: "drag_cluster_onto_cluster", source: 4, target: 9 },
      { kind: "merge", payload: { a: 4, b: 9 } },
    ],
    [
      { kind: "drag_items_to_trash", items: [5] },
      { kind: "remove_items", payload: { items: [5] } },
    ],
    [
      { kind: "drag_cluster_to_trash", clusterId: 2 },
      { kind: "remove_cluster", payload: { cluster_id: 2 } },
    ],
    [
      { kind: "set_weight_sliders", weights: { price: 0, year: 2 } },
      { kind: "set_weights", payload: { weights: { price: 0, year: 2 } } },
    ],
  ];

  it.each(cases)("maps %o to one op", (gesture, expected) => {
    expect(gestureToOp(gesture)).toEqual(expected);
  });

  it("keeps the item list it was given, untouched", () => {
    const items = [9, 4, 4];
    const op = gestureToOp({ kind: "lasso_split", items });
    expect(op.payload.items).toBe(items);
  });
});
