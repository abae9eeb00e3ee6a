"""Deferred per-pixel line renderer over the ground plane z = 0.

Each pixel's view ray is intersected with the plane, the spatial index is
descended at the hit point, and every candidate segment is distance-tested;
the winner (priority, then distance, then stable segment id) is shaded from
its style profile with coverage-based antialiasing and blended over the
background.  The per-pixel loop lives in a kernel module: a compiled
extension when available, otherwise a pure-Python twin with identical
arithmetic.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..data import NO_POINT, Dataset
from ..geometry import CameraPose, distance_point_to_segment
from ..sindex import SegmentIndex, build_index
from ..styles import (
    LEVEL_OFFSETS,
    LEVEL_SIZES,
    default_style_config,
    pack_styles,
    parse_style_config,
    select_level,
)
from ..visibility import Lens, ThresholdPolicy, effective_lens_factor


@dataclass(frozen=True)
class FrameFlags:
    """Render-mode switches; combinations give the four benchmark modes."""

    dynamic_thickness: bool = False
    visibility_check: bool = True
    use_all_segments: bool = True


BENCH_MODES = {
    "AVD": FrameFlags(dynamic_thickness=True, visibility_check=True, use_all_segments=True),
    "AVS": FrameFlags(dynamic_thickness=False, visibility_check=True, use_all_segments=True),
    "ANVS": FrameFlags(dynamic_thickness=False, visibility_check=False, use_all_segments=True),
    "ONVS": FrameFlags(dynamic_thickness=False, visibility_check=False, use_all_segments=False),
}


@dataclass
class FrameSpec:
    camera: CameraPose
    width: int
    height: int
    tolerance_px: float = 1.0
    background: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    background_raster: Optional[np.ndarray] = None  # (Hr, Wr, 4) floats in [0,1]
    background_rect: Optional[Tuple[float, float, float, float]] = None
    mode: str = "color"  # color | heatmap
    lens: Optional[Lens] = None
    flags: FrameFlags = field(default_factory=FrameFlags)


@dataclass
class RenderResult:
    rgba: np.ndarray  # (H, W, 4) uint8
    counts: np.ndarray  # (H, W) int64 distance tests per pixel


def camera_basis(camera: CameraPose):
    """Forward / right / up unit vectors of the eye frame."""
    cy, sy = math.cos(camera.yaw), math.sin(camera.yaw)
    cp, sp = math.cos(camera.pitch), math.sin(camera.pitch)
    f = (cp * cy, cp * sy, -sp)
    r = (sy, -cy, 0.0)
    u = (
        r[1] * f[2] - r[2] * f[1],
        r[2] * f[0] - r[0] * f[2],
        r[0] * f[1] - r[1] * f[0],
    )
    return f, r, u


def pixel_to_world(
    camera: CameraPose, px: float, py: float, width: int = 0, height: int = 0
) -> Optional[Tuple[float, float]]:
    """Ground-plane hit of the view ray through pixel coordinates (px, py).

    Coordinates are continuous with (0, 0) at the top-left image corner;
    a pixel center is at integer + 0.5.  Returns None at or above the
    horizon.
    """
    w = width or camera.viewport_w
    h = height or camera.viewport_h
    f, r, u = camera_basis(camera)
    tan_half = math.tan(camera.fov_y / 2.0)
    aspect = w / h
    ndc_x = (2.0 * px / w - 1.0) * tan_half * aspect
    ndc_y = (1.0 - 2.0 * py / h) * tan_half
    dx = f[0] + ndc_x * r[0] + ndc_y * u[0]
    dy = f[1] + ndc_x * r[1] + ndc_y * u[1]
    dz = f[2] + ndc_x * r[2] + ndc_y * u[2]
    if dz >= 0.0:
        return None
    t = -camera.height / dz
    return (camera.x + t * dx, camera.y + t * dy)


def effective_width(line_type, d: float, dynamic: bool) -> float:
    """Rendered width at eye distance d; static width unless dynamic."""
    if not dynamic:
        return line_type.base_width
    span = line_type.d_far - line_type.d_near
    if span <= 0.0:
        t = 1.0 if d >= line_type.d_far else 0.0
    else:
        t = (d - line_type.d_near) / span
        t = min(max(t, 0.0), 1.0)
    return line_type.base_width * (line_type.m_near + t * (line_type.m_far - line_type.m_near))


def coverage(dist: float, half_width: float, pixel_footprint: float) -> float:
    """Linear-ramp pixel/line overlap fraction."""
    c = 0.5 + (half_width - dist) / pixel_footprint
    return min(max(c, 0.0), 1.0)


class RenderContext:
    """Flat read-only buffers consumed by the shading kernels."""

    def __init__(self, frame: FrameSpec, dataset: Dataset):
        if frame.width < 1 or frame.height < 1:
            raise ValueError("viewport must be at least 1x1")
        cam = frame.camera
        self.W = frame.width
        self.H = frame.height
        f, r, u = camera_basis(cam)
        self.eye_x, self.eye_y, self.eye_z = cam.x, cam.y, cam.height
        self.fx, self.fy, self.fz = f
        self.rx, self.ry, self.rz = r
        self.ux, self.uy, self.uz = u
        self.tan_half = math.tan(cam.fov_y / 2.0)
        self.aspect = frame.width / frame.height
        self.tol_px = frame.tolerance_px
        self.eps_scale = 2.0 * self.tan_half / frame.height
        lens = frame.lens
        self.lens_on = lens is not None and lens.factor != 1.0
        self.lens_cx = lens.cx if lens else 0.0
        self.lens_cy = lens.cy if lens else 0.0
        self.lens_r = lens.radius if lens else 0.0
        self.lens_factor = lens.factor if lens else 1.0
        self.vis_check = frame.flags.visibility_check
        self.dynamic = frame.flags.dynamic_thickness

        self.points = np.ascontiguousarray(dataset.points, dtype=np.float64)
        self.eval_pos = np.ascontiguousarray(dataset.eval_pos, dtype=np.float64)
        self.e_star = np.ascontiguousarray(dataset.e_star, dtype=np.float64)
        self.d_star = np.ascontiguousarray(dataset.d_star, dtype=np.float64)

        segs = dataset.segments if frame.flags.use_all_segments else dataset.orig_segments
        self.seg_a = np.ascontiguousarray(segs.a, dtype=np.int32)
        self.seg_b = np.ascontiguousarray(segs.b, dtype=np.int32)
        self.seg_gen = np.ascontiguousarray(segs.generator, dtype=np.int32)
        self.seg_spl = np.ascontiguousarray(segs.splitter, dtype=np.int32)
        self.seg_lt = np.ascontiguousarray(segs.line_type, dtype=np.int32)

        max_id = max(dataset.line_types) if dataset.line_types else 0
        n_lt = max_id + 1
        self.lt_priority = np.zeros(n_lt, dtype=np.int64)
        self.lt_base_w = np.full(n_lt, 1.0)
        self.lt_m_near = np.ones(n_lt)
        self.lt_m_far = np.ones(n_lt)
        self.lt_d_near = np.zeros(n_lt)
        self.lt_d_far = np.ones(n_lt)
        self.lt_style = np.zeros(n_lt, dtype=np.int64)
        for lt_id, lt in dataset.line_types.items():
            self.lt_priority[lt_id] = lt.priority
            self.lt_base_w[lt_id] = lt.base_width
            self.lt_m_near[lt_id] = lt.m_near
            self.lt_m_far[lt_id] = lt.m_far
            self.lt_d_near[lt_id] = lt.d_near
            self.lt_d_far[lt_id] = lt.d_far
            self.lt_style[lt_id] = lt.style_profile_id

        idx = _index_for(frame, dataset)
        self.index = idx
        self.bbox0, self.bbox1, self.bbox2, self.bbox3 = idx.bbox
        self.grid_w = idx.grid_w
        self.grid_h = idx.grid_h
        self.cell_root = idx.cell_root
        self.children = np.ascontiguousarray(idx.children)
        self.node_seg_off = idx.node_seg_off
        self.node_seg_cnt = idx.node_seg_cnt
        self.seg_refs = idx.seg_refs

        cfg = dataset.style_config or default_style_config()
        _, profiles = parse_style_config(cfg)
        referenced = {lt.style_profile_id for lt in dataset.line_types.values()}
        missing = referenced - set(profiles)
        if missing:
            raise ValueError(f"line types reference unknown style profiles {sorted(missing)}")
        self.style_tex = pack_styles(list(profiles.values()))
        self.level_off = np.array(LEVEL_OFFSETS, dtype=np.int64)
        self.level_size = np.array(LEVEL_SIZES, dtype=np.int64)

        self.bg = _background_image(frame)


def _index_for(frame: FrameSpec, dataset: Dataset) -> SegmentIndex:
    if frame.flags.use_all_segments:
        name = "ap_dynamic" if frame.flags.dynamic_thickness else "ap_static"
        segs = dataset.segments
    else:
        name = "orig_static"
        segs = dataset.orig_segments
    idx = dataset.indexes.get(name)
    if idx is None:
        idx = build_index(
            segs,
            dataset.points,
            dataset.line_types,
            dataset.bbox,
            dynamic_thickness=frame.flags.dynamic_thickness and frame.flags.use_all_segments,
        )
        dataset.indexes[name] = idx
    return idx


def _background_image(frame: FrameSpec) -> np.ndarray:
    const = np.array(frame.background, dtype=np.float64)
    bg = np.empty((frame.height, frame.width, 4), dtype=np.float64)
    bg[:] = const
    if frame.background_raster is None:
        return bg
    if frame.background_rect is None:
        raise ValueError("background_raster requires background_rect")
    # nearest-neighbor sample the raster where ground rays land
    ground = np.full((frame.height, frame.width, 2), np.nan)
    for py in range(frame.height):
        for px in range(frame.width):
            q = pixel_to_world(frame.camera, px + 0.5, py + 0.5, frame.width, frame.height)
            if q is not None:
                ground[py, px] = q
    rx0, ry0, rx1, ry1 = frame.background_rect
    ras = frame.background_raster
    hr, wr = ras.shape[:2]
    hit = ~np.isnan(ground[..., 0])
    gx = ground[..., 0][hit]
    gy = ground[..., 1][hit]
    ix = np.clip(((gx - rx0) / (rx1 - rx0) * wr).astype(np.int64), 0, wr - 1)
    iy = np.clip(((ry1 - gy) / (ry1 - ry0) * hr).astype(np.int64), 0, hr - 1)
    bg[hit] = ras[iy, ix]
    return bg


def shade_fragment(
    q: Tuple[float, float],
    pixel_footprint: float,
    frame: FrameSpec,
    dataset: Dataset,
    candidate_ids=None,
):
    """Reference fragment shader returning (RGBA floats, testCount).

    ``candidate_ids`` overrides the index descent; the result must not
    depend on the order of that sequence.
    """
    ctx = RenderContext(frame, dataset)
    if candidate_ids is None:
        candidate_ids = list(ctx.index.descend(q[0], q[1]))
    cam = frame.camera
    policy = ThresholdPolicy(frame.tolerance_px, ctx.eps_scale)
    segs = dataset.segments if frame.flags.use_all_segments else dataset.orig_segments
    d_frag = math.sqrt((q[0] - cam.x) ** 2 + (q[1] - cam.y) ** 2 + cam.height**2)

    def included(pid: int) -> bool:
        ex, ey = dataset.eval_pos[pid]
        d = math.sqrt((ex - cam.x) ** 2 + (ey - cam.y) ** 2 + cam.height**2)
        fac = effective_lens_factor(frame.lens, ex, ey, dataset.d_star[pid])
        return dataset.e_star[pid] > fac * policy.epsilon(d - dataset.d_star[pid])

    best = -1
    best_pri = None
    best_dist = math.inf
    best_hw = 0.0
    best_cov = 0.0
    tests = 0
    for sid in candidate_ids:
        if frame.flags.visibility_check:
            gen = int(segs.generator[sid])
            if gen != NO_POINT and not included(gen):
                continue
            spl = int(segs.splitter[sid])
            if spl != NO_POINT and included(spl):
                continue
        a = dataset.points[segs.a[sid]]
        b = dataset.points[segs.b[sid]]
        dist = distance_point_to_segment(q, tuple(a), tuple(b))
        tests += 1
        lt = dataset.line_types[int(segs.line_type[sid])]
        hw = effective_width(lt, d_frag, frame.flags.dynamic_thickness) / 2.0
        cov = coverage(dist, hw, pixel_footprint)
        if cov <= 0.0:
            continue
        pri = lt.priority
        if (
            best_pri is None
            or pri > best_pri
            or (pri == best_pri and (dist < best_dist or (dist == best_dist and sid < best)))
        ):
            best, best_pri, best_dist, best_hw, best_cov = sid, pri, dist, hw, cov

    bg = np.array(frame.background, dtype=np.float64)
    if best < 0:
        return tuple(bg), tests
    lt = dataset.line_types[int(segs.line_type[best])]
    u = min(best_dist / best_hw, 1.0)
    tpp = pixel_footprint * 256.0 / best_hw
    level = select_level(tpp)
    color = _sample_packed(ctx.style_tex, int(lt.style_profile_id), level, u, ctx)
    alpha = best_cov * color[3]
    out = color[:3] * alpha + bg[:3] * (1.0 - alpha)
    out_a = alpha + bg[3] * (1.0 - alpha)
    return (float(out[0]), float(out[1]), float(out[2]), float(out_a)), tests


def _sample_packed(tex, style, level, u, ctx):
    n = int(ctx.level_size[level])
    off = int(ctx.level_off[level])
    if n == 1:
        return tex[style, off].copy()
    x = u * (n - 1)
    i0 = int(x)
    if i0 >= n - 1:
        return tex[style, off + n - 1].copy()
    f = x - i0
    return (1.0 - f) * tex[style, off + i0] + f * tex[style, off + i0 + 1]


def get_kernel(which: str = "auto"):
    """Select the shading kernel: compiled extension if importable."""
    if which in ("auto", "compiled"):
        try:
            from . import _kernel

            return _kernel, "compiled"
        except ImportError:
            if which == "compiled":
                raise
    from . import _kernel_py

    return _kernel_py, "python"


def render_frame(
    frame: FrameSpec, dataset: Dataset, workers: int = 1, kernel: str = "auto"
) -> RenderResult:
    """Render one frame; output is identical for any worker count."""
    ctx = RenderContext(frame, dataset)
    kern, _ = get_kernel(kernel)
    rgba = np.empty((ctx.H, ctx.W, 4), dtype=np.float64)
    counts = np.zeros((ctx.H, ctx.W), dtype=np.int64)
    workers = max(1, workers)
    bands = [
        (ctx.H * i // workers, ctx.H * (i + 1) // workers) for i in range(workers)
    ]
    bands = [(a, b) for a, b in bands if b > a]
    if len(bands) == 1:
        kern.render_rows(ctx, rgba, counts, 0, ctx.H)
    else:
        with ThreadPoolExecutor(max_workers=len(bands)) as pool:
            futs = [pool.submit(kern.render_rows, ctx, rgba, counts, a, b) for a, b in bands]
            for f in futs:
                f.result()
    out = np.floor(np.clip(rgba, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return RenderResult(rgba=out, counts=counts)


# ---------------------------------------------------------------------------
# output helpers

HEATMAP_LOG_CAP = 16.0  # counts of 2^16 and above saturate the ramp


def heatmap_image(counts: np.ndarray) -> np.ndarray:
    """Color visualization of a count matrix.

    Zero is white; positive counts run log2-scaled from blue (count 1)
    to red (count >= 2^16), i.e. t = min(log2(1 + count) / 16, 1) and
    color = (255 t, 0, 255 (1 - t)).
    """
    h, w = counts.shape
    img = np.full((h, w, 4), 255, dtype=np.uint8)
    pos = counts > 0
    t = np.minimum(np.log2(1.0 + counts[pos]) / HEATMAP_LOG_CAP, 1.0)
    img[pos, 0] = np.floor(255.0 * t + 0.5)
    img[pos, 1] = 0
    img[pos, 2] = np.floor(255.0 * (1.0 - t) + 0.5)
    return img


def save_png(path, rgba: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(rgba, mode="RGBA").save(path)


def write_pgm(path, counts: np.ndarray) -> None:
    """Plain-text PGM of the raw count matrix."""
    h, w = counts.shape
    maxv = max(int(counts.max()) if counts.size else 0, 1)
    with open(path, "w") as fh:
        fh.write(f"P2\n{w} {h}\n{maxv}\n")
        for row in counts:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def write_counts_csv(path, counts: np.ndarray) -> None:
    np.savetxt(path, counts, fmt="%d", delimiter=",")
