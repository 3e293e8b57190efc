/**
 * Plane geometry for the cluster view: hull outlines around cluster
 * members and point-in-polygon hit testing for the lasso.
 */

export interface XY {
  x: number;
  y: number;
}

function cross(o: XY, a: XY, b: XY): number {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/**
 * Convex hull by Andrew's monotone chain, counter-clockwise, no
 * duplicate endpoint. Degenerate inputs (< 3 points, collinear) come
 * back as-is so the caller can still draw something.
 */
export function convexHull(points: XY[]): XY[] {
  if (points.length < 3) {
    return [...points];
  }
  const sorted = [...points].sort((a, b) => a.x - b.x || a.y - b.y);
  const lower: XY[] = [];
  for (const p of sorted) {
    while (lower.length >= 2 && cross(lower[lower.length - 2]!, lower[lower.length - 1]!, p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: XY[] = [];
  for (let i = sorted.length - 1; i >= 0; i--) {
    const p = sorted[i]!;
    while (upper.length >= 2 && cross(upper[upper.length - 2]!, upper[upper.length - 1]!, p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  lower.pop();
  upper.pop();
  const hull = lower.concat(upper);
  return hull.length >= 3 ? hull : [...points];
}

/**
 * Push every hull vertex away from the hull centroid by `padding`, so
 * the outline clears the item circles it encloses.
 */
export function padHull(hull: XY[], padding: number): XY[] {
  if (hull.length === 0) {
    return [];
  }
  let cx = 0;
  let cy = 0;
  for (const p of hull) {
    cx += p.x;
    cy += p.y;
  }
  cx /= hull.length;
  cy /= hull.length;
  return hull.map((p) => {
    const dx = p.x - cx;
    const dy = p.y - cy;
    const len = Math.hypot(dx, dy);
    if (len === 0) {
      return { x: p.x, y: p.y };
    }
    const scale = (len + padding) / len;
    return { x: cx + dx * scale, y: cy + dy * scale };
  });
}

/** Ray-casting point-in-polygon test; boundary points count as inside. */
export function pointInPolygon(point: XY, polygon: XY[]): boolean {
  if (polygon.length < 3) {
    return false;
  }
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i]!;
    const b = polygon[j]!;
    const onEdge =
      Math.abs(cross(a, b, point)) < 1e-12 &&
      point.x >= Math.min(a.x, b.x) - 1e-12 &&
      point.x <= Math.max(a.x, b.x) + 1e-12 &&
      point.y >= Math.min(a.y, b.y) - 1e-12 &&
      point.y <= Math.max(a.y, b.y) + 1e-12;
    if (onEdge) {
      return true;
    }
    const crossesRay = a.y > point.y !== b.y > point.y;
    if (crossesRay) {
      const xAtY = a.x + ((point.y - a.y) / (b.y - a.y)) * (b.x - a.x);
      if (point.x < xAtY) {
        inside = !inside;
      }
    }
  }
  return inside;
}

/** Ids of the items whose circle centers fall inside the lasso polygon. */
export function lassoHits(
  points: Array<XY & { item_id: number }>,
  polygon: XY[],
): number[] {
  return points.filter((p) => pointInPolygon(p, polygon)).map((p) => p.item_id);
}

/** Convex polygon around a set of points, padded outward a little. */
export function lassoAround(points: XY[], padding = 0.01): XY[] {
  return padHull(convexHull(points), padding);
}
