// Canvas rendering for the editor and playback views. World coordinates
// are meters, y-up; the canvas transform flips y and applies pan/zoom.

import { Vec2 } from "./geometry.js";
import { DocumentState } from "./model.js";
import { StepFrame } from "./playback.js";

export interface Viewport {
  scale: number; // pixels per meter
  center: Vec2; // world point at the canvas center
}

export function worldToScreen(p: Vec2, view: Viewport, canvas: HTMLCanvasElement): Vec2 {
  return {
    x: canvas.width / 2 + (p.x - view.center.x) * view.scale,
    y: canvas.height / 2 - (p.y - view.center.y) * view.scale,
  };
}

export function screenToWorld(p: Vec2, view: Viewport, canvas: HTMLCanvasElement): Vec2 {
  return {
    x: view.center.x + (p.x - canvas.width / 2) / view.scale,
    y: view.center.y - (p.y - canvas.height / 2) / view.scale,
  };
}

const COLORS = {
  background: "#fafafa",
  grid: "#e8e8e8",
  wall: "#2255bb",
  node: "#444444",
  nodeLabel: "#777777",
  edge: "#bbbbbb",
  route: "#22aa55",
  humanRoute: "#cc8822",
  agent: "#227788",
  agentHeading: "#ffffff",
  human: "#cc8822",
  collision: "#dd2222",
  success: "#22bb44",
};

export function drawGrid(
  ctx: CanvasRenderingContext2D, view: Viewport, canvas: HTMLCanvasElement, grid: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (grid * view.scale < 6) return; // too dense to draw
  const halfW = canvas.width / 2 / view.scale;
  const halfH = canvas.height / 2 / view.scale;
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.beginPath();
  const x0 = Math.floor((view.center.x - halfW) / grid) * grid;
  for (let x = x0; x <= view.center.x + halfW; x += grid) {
    const sx = worldToScreen({ x, y: 0 }, view, canvas).x;
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, canvas.height);
  }
  const y0 = Math.floor((view.center.y - halfH) / grid) * grid;
  for (let y = y0; y <= view.center.y + halfH; y += grid) {
    const sy = worldToScreen({ x: 0, y }, view, canvas).y;
    ctx.moveTo(0, sy);
    ctx.lineTo(canvas.width, sy);
  }
  ctx.stroke();
}

export function drawDocument(
  ctx: CanvasRenderingContext2D, state: DocumentState, view: Viewport,
  canvas: HTMLCanvasElement,
): void {
  // walls
  ctx.strokeStyle = COLORS.wall;
  ctx.lineWidth = 2.5;
  ctx.beginPath();
  for (const seg of state.map.segments) {
    const a = worldToScreen(seg.a, view, canvas);
    const b = worldToScreen(seg.b, view, canvas);
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
  }
  ctx.stroke();

  // edges
  const nodeById = new Map(state.graph.nodes.map((n) => [n.id, n]));
  ctx.strokeStyle = COLORS.edge;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (const [i, j] of state.graph.edges) {
    const a = nodeById.get(i);
    const b = nodeById.get(j);
    if (!a || !b) continue;
    const pa = worldToScreen(a.p, view, canvas);
    const pb = worldToScreen(b.p, view, canvas);
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
  }
  ctx.stroke();

  // routes as colored overlays
  const drawRoute = (ids: number[], color: string) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 3;
    ctx.globalAlpha = 0.45;
    ctx.beginPath();
    ids.forEach((id, idx) => {
      const node = nodeById.get(id);
      if (!node) return;
      const p = worldToScreen(node.p, view, canvas);
      if (idx === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    ctx.stroke();
    ctx.globalAlpha = 1.0;
  };
  for (const route of state.scenario.agents) drawRoute(route.nodeIds, COLORS.route);
  for (const route of state.scenario.humans) drawRoute(route.nodeIds, COLORS.humanRoute);

  // nodes with ids
  ctx.font = "11px sans-serif";
  for (const node of state.graph.nodes) {
    const p = worldToScreen(node.p, view, canvas);
    ctx.fillStyle = COLORS.node;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = COLORS.nodeLabel;
    ctx.fillText(String(node.id), p.x + 6, p.y - 6);
  }
}

export function drawFrame(
  ctx: CanvasRenderingContext2D, frame: StepFrame, view: Viewport,
  canvas: HTMLCanvasElement, agentRadius = 0.3,
): void {
  for (const agent of frame.agents) {
    const p = worldToScreen({ x: agent.x, y: agent.y }, view, canvas);
    const r = agentRadius * view.scale;
    ctx.fillStyle = agent.succ
      ? COLORS.success
      : agent.coll.length > 0
        ? COLORS.collision
        : COLORS.agent;
    ctx.beginPath();
    ctx.arc(p.x, p.y, r, 0, 2 * Math.PI);
    ctx.fill();
    // heading tick
    ctx.strokeStyle = COLORS.agentHeading;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(p.x, p.y);
    ctx.lineTo(p.x + r * Math.cos(agent.psi), p.y - r * Math.sin(agent.psi));
    ctx.stroke();
    // collision flash ring
    if (agent.coll.length > 0) {
      ctx.strokeStyle = COLORS.collision;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.arc(p.x, p.y, r + 4, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
  for (const human of frame.humans) {
    const p = worldToScreen({ x: human.x, y: human.y }, view, canvas);
    ctx.fillStyle = COLORS.human;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 0.25 * view.scale, 0, 2 * Math.PI);
    ctx.fill();
  }
}
