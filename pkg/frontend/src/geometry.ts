// Geometric primitives mirroring the engine's predicates, used for
// client-side validation before export.

export interface Vec2 {
  x: number;
  y: number;
}

export interface Segment {
  a: Vec2;
  b: Vec2;
}

const EPS = 1e-9;

export function dist(a: Vec2, b: Vec2): number {
  return Math.hypot(a.x - b.x, a.y - b.y);
}

function cross(ox: number, oy: number, ax: number, ay: number): number {
  return ox * ay - oy * ax;
}

/** Intersection of two closed segments; collinear overlap returns the
 * overlap midpoint, matching the engine. */
export function segmentsIntersect(s1: Segment, s2: Segment): Vec2 | null {
  const rx = s1.b.x - s1.a.x;
  const ry = s1.b.y - s1.a.y;
  const sx = s2.b.x - s2.a.x;
  const sy = s2.b.y - s2.a.y;
  const qpx = s2.a.x - s1.a.x;
  const qpy = s2.a.y - s1.a.y;
  const denom = cross(rx, ry, sx, sy);
  const qpxr = cross(qpx, qpy, rx, ry);

  if (Math.abs(denom) < EPS) {
    if (Math.abs(qpxr) >= EPS) return null;
    const rr = rx * rx + ry * ry;
    const t0 = (qpx * rx + qpy * ry) / rr;
    const t1 = ((qpx + sx) * rx + (qpy + sy) * ry) / rr;
    const lo = Math.max(0, Math.min(t0, t1));
    const hi = Math.min(1, Math.max(t0, t1));
    if (lo > hi + EPS) return null;
    const tm = 0.5 * (lo + hi);
    return { x: s1.a.x + tm * rx, y: s1.a.y + tm * ry };
  }

  const t = cross(qpx, qpy, sx, sy) / denom;
  const u = qpxr / denom;
  if (t >= -EPS && t <= 1 + EPS && u >= -EPS && u <= 1 + EPS) {
    const tc = Math.min(1, Math.max(0, t));
    return { x: s1.a.x + tc * rx, y: s1.a.y + tc * ry };
  }
  return null;
}

export function distancePointSegment(p: Vec2, s: Segment): number {
  const dx = s.b.x - s.a.x;
  const dy = s.b.y - s.a.y;
  const len2 = dx * dx + dy * dy;
  const t = Math.min(1, Math.max(0, ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2));
  return Math.hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

/** Round to 9 significant digits, matching the engine's file precision. */
export function round9(x: number): number {
  if (x === 0) return 0;
  return parseFloat(x.toPrecision(9));
}
