/** Canvas drawing of /query responses: top-down chains, lens ring, stats.
 *
 * Drawing is written against a narrow context interface so tests can record
 * every stroke; each drawn vertex comes verbatim from a query response.
 */

import type { Meta, QueryPolyline, QueryResponse, QueryStats } from "./api.js";
import type { ViewerState } from "./state.js";

/** The subset of CanvasRenderingContext2D the viewer needs. */
export interface Ctx2D {
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  lineJoin: string;
  lineCap: string;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

const PALETTE = [
  "#1f4e9c",
  "#c23b22",
  "#2a7f3f",
  "#8655b5",
  "#b07b18",
  "#0f8b8d",
];

export function colorForType(typeId: number): string {
  return PALETTE[((typeId % PALETTE.length) + PALETTE.length) % PALETTE.length];
}

export interface Viewport {
  width: number;
  height: number;
}

/** World -> screen for the top-down view (tilt never affects drawing). */
export function worldToScreen(
  state: ViewerState,
  view: Viewport,
  wx: number,
  wy: number,
): [number, number] {
  return [
    view.width / 2 + (wx - state.centerX) * state.zoom,
    view.height / 2 - (wy - state.centerY) * state.zoom,
  ];
}

export function screenToWorld(
  state: ViewerState,
  view: Viewport,
  px: number,
  py: number,
): [number, number] {
  return [
    state.centerX + (px - view.width / 2) / state.zoom,
    state.centerY - (py - view.height / 2) / state.zoom,
  ];
}

function strokeChain(
  ctx: Ctx2D,
  state: ViewerState,
  view: Viewport,
  chain: QueryPolyline,
  color: string,
  width: number,
): void {
  if (chain.points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  chain.points.forEach(([wx, wy], i) => {
    const [px, py] = worldToScreen(state, view, wx, wy);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

export function drawScene(
  ctx: Ctx2D,
  state: ViewerState,
  view: Viewport,
  meta: Meta,
  response: QueryResponse,
  /** full-detail reference chains for the original-vs-simplified overlay */
  reference?: QueryResponse,
): void {
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, view.width, view.height);
  ctx.lineJoin = "round";
  ctx.lineCap = "round";
  ctx.setLineDash([]);

  const widthOf = new Map(meta.lineTypes.map((lt) => [lt.id, lt.baseWidth]));
  if (state.showDiff && reference) {
    ctx.setLineDash([4, 4]);
    for (const chain of reference.polylines) {
      strokeChain(ctx, state, view, chain, "#c0c0c0", 1);
    }
    ctx.setLineDash([]);
  }
  for (const chain of response.polylines) {
    const base = widthOf.get(chain.type) ?? 4;
    const px = Math.max(1, Math.min(base * state.zoom, 12));
    strokeChain(ctx, state, view, chain, colorForType(chain.type), px);
  }
  if (state.lens.enabled) {
    const [cx, cy] = worldToScreen(state, view, state.lens.cx, state.lens.cy);
    ctx.strokeStyle = state.lens.factor < 1 ? "#d4148c" : "#148cd4";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, state.lens.radius * state.zoom, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function statsLines(stats: QueryStats): string[] {
  return [
    `points ${stats.includedPoints}`,
    `segments ${stats.visibleSegments}`,
    `reduction ${stats.reductionPct.toFixed(1)}%`,
  ];
}

export function drawStats(ctx: Ctx2D, stats: QueryStats): void {
  ctx.fillStyle = "rgba(255,255,255,0.85)";
  ctx.fillRect(8, 8, 150, 54);
  ctx.fillStyle = "#222222";
  ctx.font = "12px monospace";
  statsLines(stats).forEach((line, i) => ctx.fillText(line, 14, 24 + 15 * i));
}

/** Vertices of a response that land inside a world-space circle. */
export function verticesInCircle(
  response: QueryResponse,
  cx: number,
  cy: number,
  radius: number,
): number {
  let count = 0;
  for (const chain of response.polylines) {
    for (const [x, y] of chain.points) {
      if (Math.hypot(x - cx, y - cy) <= radius) count += 1;
    }
  }
  return count;
}

export function totalVertices(response: QueryResponse): number {
  return response.polylines.reduce((n, c) => n + c.points.length, 0);
}
