"""HTTP query/render service over one loaded dataset.

All endpoints are read-only; identical requests return identical bodies.
The dataset is immutable after startup, so requests may run concurrently
without locking.
"""
from __future__ import annotations

import io
import math
from typing import List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .data import Dataset
from .geometry import CameraPose, GeometryError
from .raster.core import BENCH_MODES, FrameSpec, heatmap_image, render_frame
from .visibility import Lens, ThresholdPolicy, simplify_scene

DEFAULT_MAX_PIXELS = 4_000_000


class CameraModel(BaseModel):
    x: float
    y: float
    height: float = Field(gt=0)
    yaw: float = 0.0
    pitch: float = math.pi / 2
    fovY: float = math.pi / 3
    viewportW: int = Field(default=800, ge=1)
    viewportH: int = Field(default=600, ge=1)

    def to_pose(self) -> CameraPose:
        return CameraPose(
            x=self.x,
            y=self.y,
            height=self.height,
            yaw=self.yaw,
            pitch=self.pitch,
            fov_y=self.fovY,
            viewport_w=self.viewportW,
            viewport_h=self.viewportH,
        )


class LensModel(BaseModel):
    cx: float
    cy: float
    radius: float = Field(gt=0)
    factor: float = Field(gt=0)


class QueryRequest(BaseModel):
    camera: CameraModel
    tolerancePx: float = Field(default=1.0, ge=0)
    lens: Optional[LensModel] = None


def view_footprint(camera: CameraPose) -> Optional[Tuple[float, float, float, float]]:
    """Ground bbox covered by the viewport, or None when the horizon shows."""
    from .raster.core import pixel_to_world

    w, h = camera.viewport_w, camera.viewport_h
    corners = []
    for px, py in ((0.0, 0.0), (w, 0.0), (0.0, h), (w, h)):
        q = pixel_to_world(camera, px, py)
        if q is None:
            return None
        corners.append(q)
    xs = [c[0] for c in corners]
    ys = [c[1] for c in corners]
    return (min(xs), min(ys), max(xs), max(ys))


def create_app(dataset: Dataset, max_pixels: int = DEFAULT_MAX_PIXELS) -> FastAPI:
    app = FastAPI(title="line simplification service")

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    @app.exception_handler(Exception)
    async def internal(request: Request, exc: Exception):
        # never leak internals
        return JSONResponse(status_code=500, content={"detail": "internal error"})

    @app.get("/meta")
    def meta():
        return {
            "bbox": list(dataset.bbox),
            "pointCount": len(dataset.points),
            "segmentCount": len(dataset.segments),
            "origSegmentCount": len(dataset.orig_segments),
            "polylineCount": len(dataset.polylines),
            "lineTypes": [
                {
                    "id": lt.id,
                    "name": lt.name,
                    "priority": lt.priority,
                    "baseWidth": lt.base_width,
                }
                for _, lt in sorted(dataset.line_types.items())
            ],
        }

    @app.post("/query")
    def query(req: QueryRequest):
        try:
            camera = req.camera.to_pose()
        except GeometryError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        policy = ThresholdPolicy.for_camera(camera, req.tolerancePx)
        lens = (
            Lens(cx=req.lens.cx, cy=req.lens.cy, radius=req.lens.radius, factor=req.lens.factor)
            if req.lens
            else None
        )
        clip = view_footprint(camera)
        chains = simplify_scene(dataset, camera, policy, lens, clip_rect=clip)
        polylines = []
        included = 0
        visible_segments = 0
        clipped_total = 0
        for pl, chain in chains:
            polylines.append(
                {
                    "type": pl.line_type,
                    "points": [
                        [float(dataset.points[pid, 0]), float(dataset.points[pid, 1])]
                        for pid in chain
                    ],
                }
            )
            included += len(chain)
            visible_segments += len(chain) - 1
            clipped_total += pl.count
        reduction = 100.0 * (1.0 - included / clipped_total) if clipped_total else 0.0
        return {
            "polylines": polylines,
            "stats": {
                "includedPoints": included,
                "visibleSegments": visible_segments,
                "reductionPct": reduction,
            },
        }

    @app.get("/render")
    def render(
        x: float,
        y: float,
        height: float,
        yaw: float = 0.0,
        pitch: float = math.pi / 2,
        fovY: float = math.pi / 3,
        width: int = 800,
        heightPx: int = 600,
        tolerancePx: float = 1.0,
        mode: str = "color",
        benchMode: str = "AVS",
        lensCx: Optional[float] = None,
        lensCy: Optional[float] = None,
        lensRadius: Optional[float] = None,
        lensFactor: Optional[float] = None,
    ):
        if width * heightPx > max_pixels:
            return JSONResponse(status_code=413, content={"detail": "viewport too large"})
        if benchMode not in BENCH_MODES or mode not in ("color", "heatmap"):
            return JSONResponse(status_code=400, content={"detail": "unknown render mode"})
        try:
            camera = CameraPose(
                x=x, y=y, height=height, yaw=yaw, pitch=pitch, fov_y=fovY,
                viewport_w=width, viewport_h=heightPx,
            )
        except GeometryError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        lens = None
        if lensRadius is not None:
            try:
                lens = Lens(
                    cx=lensCx or 0.0, cy=lensCy or 0.0, radius=lensRadius,
                    factor=lensFactor if lensFactor is not None else 1.0,
                )
            except ValueError as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})
        frame = FrameSpec(
            camera=camera,
            width=width,
            height=heightPx,
            tolerance_px=tolerancePx,
            lens=lens,
            mode=mode,
            flags=BENCH_MODES[benchMode],
        )
        out = render_frame(frame, dataset)
        img = heatmap_image(out.counts) if mode == "heatmap" else out.rgba
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(img, mode="RGBA").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app
