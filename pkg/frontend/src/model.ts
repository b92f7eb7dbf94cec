// The editor's document model: map, graph, and scenario drafts with an
// undo stack and dirty flags. All mutations go through EditorDocument so
// undo sees every change.

import { Segment, Vec2 } from "./geometry.js";

export interface GraphNode {
  id: number;
  p: Vec2;
}

export interface MapDraft {
  name: string;
  segments: Segment[];
}

export interface GraphDraft {
  mapName: string;
  nodes: GraphNode[];
  edges: [number, number][];
}

export interface RouteDraft {
  nodeIds: number[];
}

export interface ScenarioDraft {
  mapRef: string;
  graphRef: string;
  agents: RouteDraft[];
  humans: RouteDraft[];
}

export interface DocumentState {
  map: MapDraft;
  graph: GraphDraft;
  scenario: ScenarioDraft;
}

function cloneState(s: DocumentState): DocumentState {
  return JSON.parse(JSON.stringify(s));
}

export function emptyState(name = "untitled"): DocumentState {
  return {
    map: { name, segments: [] },
    graph: { mapName: name, nodes: [], edges: [] },
    scenario: { mapRef: `${name}.map.json`, graphRef: `${name}.graph.json`, agents: [], humans: [] },
  };
}

export class EditorDocument {
  state: DocumentState;
  dirty = false;
  private undoStack: DocumentState[] = [];
  private redoStack: DocumentState[] = [];

  constructor(state?: DocumentState) {
    this.state = state ?? emptyState();
  }

  /** Apply a mutation with undo support; returns the mutation's result. */
  apply<T>(mutate: (s: DocumentState) => T): T {
    const before = cloneState(this.state);
    const result = mutate(this.state);
    this.undoStack.push(before);
    this.redoStack = [];
    this.dirty = true;
    return result;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (prev === undefined) return false;
    this.redoStack.push(cloneState(this.state));
    this.state = prev;
    this.dirty = true;
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (next === undefined) return false;
    this.undoStack.push(cloneState(this.state));
    this.state = next;
    this.dirty = true;
    return true;
  }

  nextNodeId(): number {
    let max = -1;
    for (const node of this.state.graph.nodes) max = Math.max(max, node.id);
    return max + 1;
  }

  node(id: number): GraphNode | undefined {
    return this.state.graph.nodes.find((n) => n.id === id);
  }

  hasEdge(i: number, j: number): boolean {
    return this.state.graph.edges.some(
      ([a, b]) => (a === i && b === j) || (a === j && b === i),
    );
  }

  markSaved(): void {
    this.dirty = false;
  }
}
