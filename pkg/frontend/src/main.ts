// Browser wiring: toolbar state machine over the document model, canvas
// input handling, file load/save, and playback control.

import { Vec2 } from "./geometry.js";
import { EditorDocument } from "./model.js";
import {
  DEFAULT_GRID,
  EditorOptions,
  RejectedEdit,
  RouteAssignment,
  connectEdge,
  drawNode,
  drawSegment,
  nodeAt,
  snap,
} from "./editor.js";
import { ExportBlocked, exportFiles, importFiles } from "./files.js";
import { validateDocument } from "./validate.js";
import { PlaybackSession, parseEpisodeLog } from "./playback.js";
import { Viewport, drawDocument, drawFrame, drawGrid, screenToWorld } from "./render.js";

type Tool = "wall" | "node" | "edge" | "route" | "pan";

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const scrubber = document.getElementById("scrubber") as HTMLInputElement;

let doc = new EditorDocument();
let tool: Tool = "wall";
const opts: EditorOptions = { grid: DEFAULT_GRID, snapEnabled: true };
const view: Viewport = { scale: 40, center: { x: 0, y: 0 } };

let pendingWallStart: Vec2 | null = null;
let pendingEdgeStart: number | null = null;
let routeDraft: RouteAssignment | null = null;
let playback: PlaybackSession | null = null;
let playing = false;
let lastTick = 0;

function status(msg: string): void {
  statusEl.textContent = msg;
}

function redraw(): void {
  drawGrid(ctx, view, canvas, opts.grid);
  drawDocument(ctx, doc.state, view, canvas);
  if (pendingWallStart) {
    const issues = validateDocument(doc.state).length;
    status(`wall: click the far endpoint (issues: ${issues})`);
  }
  if (playback) {
    drawFrame(ctx, playback.frame(), view, canvas);
    scrubber.max = String(Math.max(playback.length - 1, 0));
    scrubber.value = String(playback.cursor);
  }
}

function setTool(next: Tool): void {
  tool = next;
  pendingWallStart = null;
  pendingEdgeStart = null;
  if (routeDraft && routeDraft.nodeIds.length > 0) {
    status("route draft discarded");
  }
  routeDraft = null;
  document.querySelectorAll("[data-tool]").forEach((el) => {
    el.classList.toggle("active", (el as HTMLElement).dataset.tool === tool);
  });
  status(`tool: ${next}`);
  redraw();
}

function onCanvasClick(event: MouseEvent): void {
  const rect = canvas.getBoundingClientRect();
  const world = screenToWorld(
    { x: event.clientX - rect.left, y: event.clientY - rect.top }, view, canvas,
  );
  try {
    if (tool === "wall") {
      if (pendingWallStart === null) {
        pendingWallStart = world;
        status(`wall from (${snap(world, opts).x}, ${snap(world, opts).y})`);
      } else {
        drawSegment(doc, pendingWallStart, world, opts);
        pendingWallStart = null;
        status("wall added");
      }
    } else if (tool === "node") {
      const id = drawNode(doc, world, opts);
      status(`node ${id} added`);
    } else if (tool === "edge") {
      const hit = nodeAt(doc, world);
      if (hit === null) {
        status("edge: click a node");
        return;
      }
      if (pendingEdgeStart === null) {
        pendingEdgeStart = hit;
        status(`edge from node ${hit}: click the other node`);
      } else {
        connectEdge(doc, pendingEdgeStart, hit);
        status(`edge (${pendingEdgeStart}, ${hit}) added`);
        pendingEdgeStart = null;
      }
    } else if (tool === "route") {
      const hit = nodeAt(doc, world);
      if (hit === null) {
        status("route: click a node");
        return;
      }
      routeDraft = routeDraft ?? new RouteAssignment(doc);
      routeDraft.click(hit);
      status(`route so far: [${routeDraft.nodeIds.join(", ")}] (double-click to finish)`);
    }
  } catch (e) {
    if (e instanceof RejectedEdit) {
      status(`rejected: ${e.message}`);
    } else {
      throw e;
    }
  }
  redraw();
}

function onCanvasDblClick(): void {
  if (tool === "route" && routeDraft) {
    try {
      routeDraft.commit();
      status("route committed");
      routeDraft = null;
    } catch (e) {
      if (e instanceof RejectedEdit) status(`rejected: ${e.message}`);
      else throw e;
    }
    redraw();
  }
}

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

function onExport(): void {
  try {
    const files = exportFiles(doc.state);
    const base = doc.state.map.name;
    download(`${base}.map.json`, files.map);
    download(`${base}.graph.json`, files.graph);
    download(`${base}.scenario.json`, files.scenario);
    doc.markSaved();
    status("exported 3 files");
  } catch (e) {
    if (e instanceof ExportBlocked) {
      const proceed = window.confirm(
        `Validation failed:\n${e.violations.join("\n")}\n\nExport anyway?`,
      );
      if (proceed) {
        const files = exportFiles(doc.state, true);
        const base = doc.state.map.name;
        download(`${base}.map.json`, files.map);
        download(`${base}.graph.json`, files.graph);
        download(`${base}.scenario.json`, files.scenario);
        status("exported with validation warnings");
      } else {
        status("export cancelled");
      }
    } else {
      throw e;
    }
  }
}

async function pickFile(accept: string): Promise<string> {
  return new Promise((resolve, reject) => {
    const input = document.createElement("input");
    input.type = "file";
    input.accept = accept;
    input.onchange = () => {
      const file = input.files?.[0];
      if (!file) return reject(new Error("no file chosen"));
      file.text().then(resolve, reject);
    };
    input.click();
  });
}

async function onImport(): Promise<void> {
  try {
    status("choose map, then graph, then scenario");
    const map = await pickFile(".json");
    const graph = await pickFile(".json");
    const scenario = await pickFile(".json");
    doc = new EditorDocument(importFiles({ map, graph, scenario }));
    playback = null;
    status("imported document");
  } catch (e) {
    status(`import failed: ${(e as Error).message}`);
  }
  redraw();
}

async function onLoadLog(): Promise<void> {
  try {
    const text = await pickFile(".jsonl");
    const parsed = parseEpisodeLog(text);
    playback = new PlaybackSession(parsed);
    playing = false;
    status(
      `log loaded: ${parsed.steps.length} steps` +
        (parsed.truncated ? " (truncated; playing up to the last complete step)" : ""),
    );
  } catch (e) {
    status(`log load failed: ${(e as Error).message}`);
  }
  redraw();
}

function animate(now: number): void {
  if (playing && playback) {
    const elapsed = (now - lastTick) / 1000;
    if (elapsed * playback.speed >= playback.dt) {
      playback.tick(elapsed);
      lastTick = now;
      if (playback.atEnd()) playing = false;
      redraw();
    }
  }
  requestAnimationFrame(animate);
}

function bind(id: string, handler: () => void): void {
  document.getElementById(id)!.addEventListener("click", handler);
}

canvas.addEventListener("click", onCanvasClick);
canvas.addEventListener("dblclick", onCanvasDblClick);
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  view.scale = Math.min(200, Math.max(5, view.scale * (ev.deltaY < 0 ? 1.1 : 0.9)));
  redraw();
});
document.querySelectorAll("[data-tool]").forEach((el) => {
  el.addEventListener("click", () => setTool((el as HTMLElement).dataset.tool as Tool));
});
bind("undo", () => {
  doc.undo();
  redraw();
});
bind("redo", () => {
  doc.redo();
  redraw();
});
bind("snap", () => {
  opts.snapEnabled = !opts.snapEnabled;
  status(`grid snap ${opts.snapEnabled ? "on" : "off"} (${opts.grid} m)`);
});
bind("export", onExport);
bind("import", () => void onImport());
bind("load-log", () => void onLoadLog());
bind("play", () => {
  if (!playback) {
    status("load an episode log first");
    return;
  }
  playing = !playing;
  lastTick = performance.now();
  status(playing ? "playing" : "paused");
});
scrubber.addEventListener("input", () => {
  if (playback) {
    playing = false;
    playback.seek(Number(scrubber.value));
    redraw();
  }
});

setTool("wall");
redraw();
requestAnimationFrame(animate);
