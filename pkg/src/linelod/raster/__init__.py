"""Deferred per-pixel rasterizer package."""
from .core import (
    BENCH_MODES,
    FrameFlags,
    FrameSpec,
    RenderContext,
    RenderResult,
    camera_basis,
    coverage,
    effective_width,
    get_kernel,
    heatmap_image,
    pixel_to_world,
    render_frame,
    save_png,
    shade_fragment,
    write_counts_csv,
    write_pgm,
)

__all__ = [
    "BENCH_MODES",
    "FrameFlags",
    "FrameSpec",
    "RenderContext",
    "RenderResult",
    "camera_basis",
    "coverage",
    "effective_width",
    "get_kernel",
    "heatmap_image",
    "pixel_to_world",
    "render_frame",
    "save_png",
    "shade_fragment",
    "write_counts_csv",
    "write_pgm",
]
