// Import/export of the three engine file formats (format_version 1).
// Exports are schema-identical to engine-written files; imports reject
// newer format versions and name the offending ids on semantic errors.

import { round9 } from "./geometry.js";
import { DocumentState, emptyState } from "./model.js";
import { validateDocument } from "./validate.js";

export const FORMAT_VERSION = 1;

export class ImportError extends Error {}

export class ExportBlocked extends Error {
  constructor(public violations: string[]) {
    super(`document has ${violations.length} validation issue(s); export blocked`);
  }
}

export interface ExportedFiles {
  map: string;
  graph: string;
  scenario: string;
}

export function exportFiles(state: DocumentState, override = false): ExportedFiles {
  const violations = validateDocument(state);
  if (violations.length > 0 && !override) {
    throw new ExportBlocked(violations.map((v) => v.message));
  }
  const map = {
    format_version: FORMAT_VERSION,
    name: state.map.name,
    segments: state.map.segments.map((s) => [
      [round9(s.a.x), round9(s.a.y)],
      [round9(s.b.x), round9(s.b.y)],
    ]),
  };
  const graph = {
    format_version: FORMAT_VERSION,
    map: state.graph.mapName,
    nodes: state.graph.nodes.map((n) => ({ id: n.id, p: [round9(n.p.x), round9(n.p.y)] })),
    edges: state.graph.edges.map(([i, j]) => [i, j]),
  };
  const scenario = {
    format_version: FORMAT_VERSION,
    map: state.scenario.mapRef,
    graph: state.scenario.graphRef,
    agents: state.scenario.agents.map((r) => ({ route: [...r.nodeIds] })),
    humans: state.scenario.humans.map((r) => ({ route: [...r.nodeIds] })),
  };
  return {
    map: JSON.stringify(map, null, 1) + "\n",
    graph: JSON.stringify(graph, null, 1) + "\n",
    scenario: JSON.stringify(scenario, null, 1) + "\n",
  };
}

function parse(text: string, what: string): any {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new ImportError(`${what}: not valid JSON (${(e as Error).message})`);
  }
  if (doc.format_version !== FORMAT_VERSION) {
    throw new ImportError(
      `${what}: unsupported format_version ${doc.format_version} (expected ${FORMAT_VERSION})`,
    );
  }
  return doc;
}

export function importFiles(files: ExportedFiles): DocumentState {
  const mapDoc = parse(files.map, "map");
  const graphDoc = parse(files.graph, "graph");
  const scenarioDoc = parse(files.scenario, "scenario");

  const state = emptyState(mapDoc.name);
  state.map.name = mapDoc.name;
  state.map.segments = (mapDoc.segments as number[][][]).map((pair, idx) => {
    const [[ax, ay], [bx, by]] = pair;
    if (![ax, ay, bx, by].every(Number.isFinite)) {
      throw new ImportError(`map: segments[${idx}] has non-finite coordinates`);
    }
    return { a: { x: ax, y: ay }, b: { x: bx, y: by } };
  });

  state.graph.mapName = graphDoc.map;
  const seen = new Set<number>();
  state.graph.nodes = (graphDoc.nodes as any[]).map((n) => {
    if (seen.has(n.id)) throw new ImportError(`graph: duplicate node id ${n.id}`);
    seen.add(n.id);
    return { id: n.id, p: { x: n.p[0], y: n.p[1] } };
  });
  state.graph.edges = (graphDoc.edges as number[][]).map(([i, j]) => {
    if (!seen.has(i) || !seen.has(j)) {
      throw new ImportError(`graph: edge [${i}, ${j}] references unknown node ${seen.has(i) ? j : i}`);
    }
    return [i, j] as [number, number];
  });

  state.scenario.mapRef = scenarioDoc.map;
  state.scenario.graphRef = scenarioDoc.graph;
  const route = (entry: any, what: string) => {
    const ids: number[] = entry.route;
    for (const id of ids) {
      if (!seen.has(id)) throw new ImportError(`${what}: route references unknown node ${id}`);
    }
    return { nodeIds: [...ids] };
  };
  state.scenario.agents = (scenarioDoc.agents ?? []).map((e: any, i: number) =>
    route(e, `scenario agents[${i}]`),
  );
  state.scenario.humans = (scenarioDoc.humans ?? []).map((e: any, i: number) =>
    route(e, `scenario humans[${i}]`),
  );
  return state;
}
