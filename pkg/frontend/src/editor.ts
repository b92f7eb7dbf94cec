// Pointer-level editing operations: draw walls and nodes, connect edges,
// assign routes node by node. Coordinates snap to a configurable grid.
// Route assignment enforces edge-connectivity at each click; a
// non-adjacent click is rejected with no state change.

import { Vec2, dist } from "./geometry.js";
import { EditorDocument } from "./model.js";

export const DEFAULT_GRID = 0.25; // meters

export interface EditorOptions {
  grid: number;
  snapEnabled: boolean;
}

export function defaultOptions(): EditorOptions {
  return { grid: DEFAULT_GRID, snapEnabled: true };
}

export function snap(p: Vec2, opts: EditorOptions): Vec2 {
  if (!opts.snapEnabled) return { x: p.x, y: p.y };
  return {
    x: Math.round(p.x / opts.grid) * opts.grid,
    y: Math.round(p.y / opts.grid) * opts.grid,
  };
}

export class RejectedEdit extends Error {}

export function drawSegment(
  doc: EditorDocument, from: Vec2, to: Vec2, opts: EditorOptions = defaultOptions(),
): void {
  const a = snap(from, opts);
  const b = snap(to, opts);
  if (a.x === b.x && a.y === b.y) {
    throw new RejectedEdit("segment endpoints coincide after snapping");
  }
  doc.apply((s) => s.map.segments.push({ a, b }));
}

export function drawNode(
  doc: EditorDocument, at: Vec2, opts: EditorOptions = defaultOptions(),
): number {
  const p = snap(at, opts);
  if (doc.state.graph.nodes.some((n) => n.p.x === p.x && n.p.y === p.y)) {
    throw new RejectedEdit("a node already exists at this grid point");
  }
  return doc.apply((s) => {
    const id = s.graph.nodes.reduce((m, n) => Math.max(m, n.id), -1) + 1;
    s.graph.nodes.push({ id, p });
    return id;
  });
}

export function connectEdge(doc: EditorDocument, i: number, j: number): void {
  if (i === j) throw new RejectedEdit("self-loop edges are not allowed");
  if (!doc.node(i) || !doc.node(j)) {
    throw new RejectedEdit(`unknown node id ${doc.node(i) ? j : i}`);
  }
  if (doc.hasEdge(i, j)) throw new RejectedEdit(`edge (${i}, ${j}) already exists`);
  doc.apply((s) => s.graph.edges.push([i, j]));
}

export function nodeAt(
  doc: EditorDocument, p: Vec2, radius = 0.3,
): number | null {
  let best: number | null = null;
  let bestDist = radius;
  for (const node of doc.state.graph.nodes) {
    const d = dist(node.p, p);
    if (d <= bestDist) {
      best = node.id;
      bestDist = d;
    }
  }
  return best;
}

/** Incremental route assignment: clicks append nodes; each appended node
 * must share a graph edge with the previous one. */
export class RouteAssignment {
  nodeIds: number[] = [];

  constructor(private doc: EditorDocument, private kind: "agents" | "humans" = "agents") {}

  click(nodeId: number): void {
    if (!this.doc.node(nodeId)) {
      throw new RejectedEdit(`unknown node id ${nodeId}`);
    }
    if (this.nodeIds.length > 0) {
      const prev = this.nodeIds[this.nodeIds.length - 1];
      if (!this.doc.hasEdge(prev, nodeId)) {
        throw new RejectedEdit(
          `node ${nodeId} is not connected to ${prev}; click an adjacent node`,
        );
      }
    }
    this.nodeIds.push(nodeId);
  }

  /** Routes need at least a start and a goal. */
  get complete(): boolean {
    return this.nodeIds.length >= 2;
  }

  commit(): void {
    if (!this.complete) {
      throw new RejectedEdit("a route needs at least 2 nodes");
    }
    const ids = [...this.nodeIds];
    const kind = this.kind;
    this.doc.apply((s) => s.scenario[kind].push({ nodeIds: ids }));
    this.nodeIds = [];
  }
}
