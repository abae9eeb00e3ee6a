/** Browser entry point: wires canvas interactions to the query scheduler.
 *
 * Pointer drag pans, wheel zooms, shift+wheel resizes the lens, `l`
 * toggles the lens, `f` flips it between refine (0.2) and simplify (5)
 * factors, `s` toggles the stats panel, `d` the original-vs-simplified
 * overlay.  Every interaction serializes the state to the URL fragment and
 * issues a debounced query; the previous frame stays visible while the
 * next one is fetched.
 */

import { QueryScheduler, ServiceClient } from "./api.js";
import type { Meta, QueryResponse } from "./api.js";
import { drawScene, drawStats, screenToWorld, type Ctx2D } from "./draw.js";
import {
  MAX_TILT,
  MAX_ZOOM,
  MIN_ZOOM,
  clamp,
  defaultState,
  queryBodyForState,
  stateFromFragment,
  stateToFragment,
  type ViewerState,
} from "./state.js";

const REFINE_FACTOR = 0.2;
const SIMPLIFY_FACTOR = 5.0;

export function startViewer(
  canvas: HTMLCanvasElement,
  baseUrl: string = "",
): void {
  const ctx = canvas.getContext("2d") as unknown as Ctx2D;
  const view = { width: canvas.width, height: canvas.height };
  let state: ViewerState = window.location.hash
    ? stateFromFragment(window.location.hash)
    : defaultState();
  let meta: Meta | null = null;
  let lastFrame: QueryResponse | null = null;
  let reference: QueryResponse | null = null;
  let banner: string | null = null;
  let spinning = false;

  const client = new ServiceClient(baseUrl);
  const scheduler = new QueryScheduler(client, {
    onResult: (_body, response) => {
      lastFrame = response;
      banner = null;
      redraw();
    },
    onError: (err) => {
      banner = `service unavailable: ${String(err)}`;
      redraw(); // stale frame stays on screen
    },
    onBusy: (busy) => {
      spinning = busy;
      redraw();
    },
  });

  function redraw(): void {
    if (meta === null) return;
    if (lastFrame !== null) {
      drawScene(ctx, state, view, meta, lastFrame, reference ?? undefined);
      if (state.showStats) drawStats(ctx, lastFrame.stats);
    }
    if (spinning) {
      ctx.fillStyle = "#444444";
      ctx.font = "12px monospace";
      ctx.fillText("…", view.width - 20, 20);
    }
    if (banner !== null) {
      ctx.fillStyle = "#b00020";
      ctx.fillRect(0, view.height - 24, view.width, 24);
      ctx.fillStyle = "#ffffff";
      ctx.fillText(banner, 8, view.height - 8);
    }
  }

  function push(): void {
    window.location.hash = stateToFragment(state);
    scheduler.schedule(queryBodyForState(state, view.width, view.height));
    redraw();
  }

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (state.lens.enabled) {
      [state.lens.cx, state.lens.cy] = screenToWorld(state, view, ev.offsetX, ev.offsetY);
    }
    if (dragging) {
      state.centerX -= (ev.offsetX - lastX) / state.zoom;
      state.centerY += (ev.offsetY - lastY) / state.zoom;
      lastX = ev.offsetX;
      lastY = ev.offsetY;
    }
    if (dragging || state.lens.enabled) push();
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const scale = Math.exp(-ev.deltaY / 400);
    if (ev.shiftKey && state.lens.enabled) {
      state.lens.radius = clamp(state.lens.radius * scale, 1, 10_000);
    } else if (ev.altKey) {
      state.tilt = clamp(state.tilt + ev.deltaY / 600, 0, MAX_TILT);
    } else {
      state.zoom = clamp(state.zoom * scale, MIN_ZOOM, MAX_ZOOM);
    }
    push();
  });
  window.addEventListener("keydown", (ev) => {
    if (ev.key === "l") state.lens.enabled = !state.lens.enabled;
    else if (ev.key === "f")
      state.lens.factor = state.lens.factor < 1 ? SIMPLIFY_FACTOR : REFINE_FACTOR;
    else if (ev.key === "s") state.showStats = !state.showStats;
    else if (ev.key === "d") state.showDiff = !state.showDiff;
    else return;
    push();
  });

  const slider = document.getElementById("tolerance") as HTMLInputElement | null;
  slider?.addEventListener("input", () => {
    state.tolerancePx = Math.max(0, Number(slider.value));
    push();
  });

  void (async () => {
    try {
      meta = await client.meta();
      // center the initial view on the data unless the URL pinned one
      if (!window.location.hash) {
        state.centerX = (meta.bbox[0] + meta.bbox[2]) / 2;
        state.centerY = (meta.bbox[1] + meta.bbox[3]) / 2;
      }
      // full-detail reference for the diff overlay, fetched once
      const refState = { ...state, tolerancePx: 0, lens: { ...state.lens, enabled: false } };
      reference = await client.query(queryBodyForState(refState, view.width, view.height));
      push();
    } catch (err) {
      banner = `cannot reach service: ${String(err)}`;
      redraw();
    }
  })();
}
