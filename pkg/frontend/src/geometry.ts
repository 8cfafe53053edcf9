// Chart math, kept pure so the rendering layer is string assembly only.
//
// The service reports everything in the (piX, piY) plane with the human
// in the X seat. The chart puts the machine's average on the horizontal
// axis and the human's own average on the vertical axis, so a mischief
// machine pins the height of the running-average point at its target.

import type { ConstraintView, Point } from "./api.js";

/** Chart coordinates: h = machine average (piY), v = own average (piX). */
export type ChartPt = readonly [number, number];

export function toChart(p: Point): ChartPt {
  return [p.piY, p.piX];
}

export interface BBox {
  hMin: number;
  hMax: number;
  vMin: number;
  vMax: number;
}

/** Axis limits come from the hull alone, never from the trajectory. */
export function hullBBox(hull: Point[]): BBox {
  const pts = hull.map(toChart);
  const hs = pts.map((p) => p[0]);
  const vs = pts.map((p) => p[1]);
  return {
    hMin: Math.min(...hs),
    hMax: Math.max(...hs),
    vMin: Math.min(...vs),
    vMax: Math.max(...vs),
  };
}

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface Scales {
  px: (h: number) => number;
  py: (v: number) => number;
}

/** Linear map from chart coordinates to pixels; SVG y grows downward. */
export function makeScales(box: BBox, vp: Viewport): Scales {
  const spanH = box.hMax - box.hMin || 1;
  const spanV = box.vMax - box.vMin || 1;
  const innerW = vp.width - 2 * vp.margin;
  const innerH = vp.height - 2 * vp.margin;
  return {
    px: (h) => vp.margin + ((h - box.hMin) / spanH) * innerW,
    py: (v) => vp.height - vp.margin - ((v - box.vMin) / spanV) * innerH,
  };
}

/** Convex containment, tolerant of either winding order. `tol` is a
    distance in chart units. */
export function pointInHull(hull: Point[], p: ChartPt, tol = 1e-9): boolean {
  const pts = hull.map(toChart);
  if (pts.length < 3) return false;
  let allLeft = true;
  let allRight = true;
  for (let i = 0; i < pts.length; i++) {
    const a = pts[i]!;
    const b = pts[(i + 1) % pts.length]!;
    const len = Math.hypot(b[0] - a[0], b[1] - a[1]);
    if (len === 0) continue;
    const cross =
      (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    const dist = cross / len;
    if (dist < -tol) allLeft = false;
    if (dist > tol) allRight = false;
  }
  return allLeft || allRight;
}

export type Segment = readonly [ChartPt, ChartPt];

export interface ConstraintLine {
  kind: "constraint" | "diagonal";
  segment: Segment | null;
}

/** Intersection of the fair-split diagonal v = h with the box. */
export function diagonalSegment(box: BBox): Segment | null {
  const lo = Math.max(box.hMin, box.vMin);
  const hi = Math.min(box.hMax, box.vMax);
  if (lo >= hi) return null;
  return [
    [lo, lo],
    [hi, hi],
  ];
}

/** The line to draw inside the region. A disclosed ZD constraint comes
    from the service verbatim; a plain-vector opponent has none, so the
    chi = 1 diagonal is drawn as the reference instead. */
export function constraintSegment(
  constraint: ConstraintView | null,
  box: BBox,
): ConstraintLine {
  if (constraint && constraint.line && constraint.line.length === 2) {
    const [a, b] = constraint.line;
    return { kind: "constraint", segment: [toChart(a!), toChart(b!)] };
  }
  return { kind: "diagonal", segment: diagonalSegment(box) };
}

/** Distance from a point to a segment, for tests and hit checks. */
export function distToSegment(p: ChartPt, seg: Segment): number {
  const [a, b] = seg;
  const dh = b[0] - a[0];
  const dv = b[1] - a[1];
  const len2 = dh * dh + dv * dv;
  if (len2 === 0) return Math.hypot(p[0] - a[0], p[1] - a[1]);
  let t = ((p[0] - a[0]) * dh + (p[1] - a[1]) * dv) / len2;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(p[0] - (a[0] + t * dh), p[1] - (a[1] + t * dv));
}

export function polylinePath(pixels: ReadonlyArray<readonly [number, number]>): string {
  if (pixels.length === 0) return "";
  const parts = pixels.map(
    ([x, y], i) => `${i === 0 ? "M" : "L"}${round2(x)},${round2(y)}`,
  );
  return parts.join(" ");
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}
