// Client-side validation equivalent to the engine's `validate`
// subcommand: no graph edge may cross a wall, routes must follow edges,
// and routes need at least two nodes. Export is blocked while any
// violation remains (unless the user overrides with a warning).

import { segmentsIntersect } from "./geometry.js";
import { DocumentState } from "./model.js";

export interface Violation {
  kind: "edge-crosses-wall" | "route-not-connected" | "route-too-short" | "edge-unknown-node";
  message: string;
}

export function validateDocument(state: DocumentState): Violation[] {
  const out: Violation[] = [];
  const nodeById = new Map(state.graph.nodes.map((n) => [n.id, n]));

  for (const [i, j] of state.graph.edges) {
    const a = nodeById.get(i);
    const b = nodeById.get(j);
    if (!a || !b) {
      out.push({
        kind: "edge-unknown-node",
        message: `edge [${i}, ${j}] references unknown node ${a ? j : i}`,
      });
      continue;
    }
    state.map.segments.forEach((wall, w) => {
      if (segmentsIntersect({ a: a.p, b: b.p }, wall)) {
        out.push({
          kind: "edge-crosses-wall",
          message: `edge (${i}, ${j}) crosses wall ${w}`,
        });
      }
    });
  }

  const hasEdge = (i: number, j: number) =>
    state.graph.edges.some(([a, b]) => (a === i && b === j) || (a === j && b === i));
  for (const [kind, routes] of [
    ["agents", state.scenario.agents],
    ["humans", state.scenario.humans],
  ] as const) {
    routes.forEach((route, idx) => {
      if (route.nodeIds.length < 2) {
        out.push({
          kind: "route-too-short",
          message: `${kind}[${idx}]: a route needs at least 2 nodes`,
        });
        return;
      }
      for (let h = 0; h + 1 < route.nodeIds.length; h++) {
        const i = route.nodeIds[h];
        const j = route.nodeIds[h + 1];
        if (!hasEdge(i, j)) {
          out.push({
            kind: "route-not-connected",
            message: `${kind}[${idx}]: hop (${i}, ${j}) is not a graph edge`,
          });
        }
      }
    });
  }
  return out;
}
