/** Viewer state: camera controls, lens, tolerance and overlay toggles.
 *
 * The whole state round-trips through the URL fragment so any view can be
 * shared or reproduced exactly.
 */

export interface LensState {
  enabled: boolean;
  /** lens center in world coordinates */
  cx: number;
  cy: number;
  radius: number;
  factor: number;
}

export interface ViewerState {
  centerX: number;
  centerY: number;
  /** screen pixels per world unit at the view center */
  zoom: number;
  /** radians the camera leans away from straight down, in [0, maxTilt] */
  tilt: number;
  tolerancePx: number;
  lens: LensState;
  showStats: boolean;
  showDiff: boolean;
}

export const FOV_Y = Math.PI / 3;
/** yaw that maps screen-up to +y and screen-right to +x at nadir */
export const NORTH_UP_YAW = Math.PI / 2;
export const MAX_TILT = 1.2;
export const MIN_ZOOM = 0.01;
export const MAX_ZOOM = 1000;

export function defaultState(): ViewerState {
  return {
    centerX: 0,
    centerY: 0,
    zoom: 2,
    tilt: 0,
    tolerancePx: 1,
    lens: { enabled: false, cx: 0, cy: 0, radius: 30, factor: 0.2 },
    showStats: true,
    showDiff: false,
  };
}

export interface CameraRequest {
  x: number;
  y: number;
  height: number;
  yaw: number;
  pitch: number;
  fovY: number;
  viewportW: number;
  viewportH: number;
}

export interface QueryBody {
  camera: CameraRequest;
  tolerancePx: number;
  lens?: { cx: number; cy: number; radius: number; factor: number };
}

/** Eye height that makes one world unit cover `zoom` pixels at the center. */
export function heightForZoom(zoom: number, viewportH: number): number {
  return viewportH / (2 * zoom * Math.tan(FOV_Y / 2));
}

/** The camera sent to /query; tilt only changes the pose, never client math. */
export function cameraForState(
  state: ViewerState,
  viewportW: number,
  viewportH: number,
): CameraRequest {
  return {
    x: state.centerX,
    y: state.centerY,
    height: heightForZoom(state.zoom, viewportH),
    yaw: NORTH_UP_YAW,
    pitch: Math.PI / 2 - state.tilt,
    fovY: FOV_Y,
    viewportW,
    viewportH,
  };
}

export function queryBodyForState(
  state: ViewerState,
  viewportW: number,
  viewportH: number,
): QueryBody {
  const body: QueryBody = {
    camera: cameraForState(state, viewportW, viewportH),
    tolerancePx: state.tolerancePx,
  };
  if (state.lens.enabled) {
    body.lens = {
      cx: state.lens.cx,
      cy: state.lens.cy,
      radius: state.lens.radius,
      factor: state.lens.factor,
    };
  }
  return body;
}

const NUM = (v: string | null, fallback: number): number => {
  if (v === null) return fallback;
  const n = Number(v);
  return Number.isFinite(n) ? n : fallback;
};

export function stateToFragment(state: ViewerState): string {
  const p = new URLSearchParams();
  p.set("x", String(state.centerX));
  p.set("y", String(state.centerY));
  p.set("z", String(state.zoom));
  p.set("t", String(state.tilt));
  p.set("tol", String(state.tolerancePx));
  if (state.lens.enabled) {
    p.set(
      "lens",
      [state.lens.cx, state.lens.cy, state.lens.radius, state.lens.factor].join(","),
    );
  }
  if (state.showStats) p.set("stats", "1");
  if (state.showDiff) p.set("diff", "1");
  return p.toString();
}

export function stateFromFragment(fragment: string): ViewerState {
  const p = new URLSearchParams(fragment.replace(/^#/, ""));
  const state = defaultState();
  state.centerX = NUM(p.get("x"), state.centerX);
  state.centerY = NUM(p.get("y"), state.centerY);
  state.zoom = clamp(NUM(p.get("z"), state.zoom), MIN_ZOOM, MAX_ZOOM);
  state.tilt = clamp(NUM(p.get("t"), state.tilt), 0, MAX_TILT);
  state.tolerancePx = Math.max(0, NUM(p.get("tol"), state.tolerancePx));
  const lens = p.get("lens");
  if (lens !== null) {
    const parts = lens.split(",").map(Number);
    if (parts.length === 4 && parts.every(Number.isFinite) && parts[2] > 0 && parts[3] > 0) {
      state.lens = {
        enabled: true,
        cx: parts[0],
        cy: parts[1],
        radius: parts[2],
        factor: parts[3],
      };
    }
  }
  state.showStats = p.get("stats") === "1";
  state.showDiff = p.get("diff") === "1";
  return state;
}

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}
