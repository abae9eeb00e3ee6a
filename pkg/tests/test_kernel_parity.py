"""The compiled and pure-Python shading kernels must agree bitwise."""
import math
import random

import numpy as np
import pytest

from linelod.geometry import CameraPose, LineType, SourcePolyline
from linelod.pipeline import preprocess_scene
from linelod.raster.core import FrameFlags, FrameSpec, RenderContext, get_kernel
from linelod.visibility import Lens

compiled, which = get_kernel("auto")
pytestmark = pytest.mark.skipif(
    which != "compiled", reason="compiled kernel not built"
)
python_kernel, _ = get_kernel("python")


def busy_scene(seed=11, n_lines=6):
    rng = random.Random(seed)
    lines = []
    for j in range(n_lines):
        xs = np.cumsum([rng.uniform(1, 5) for _ in range(rng.randint(4, 9))])
        pts = tuple((float(x) - 12, rng.uniform(-12, 12)) for x in xs)
        lines.append(SourcePolyline(points=pts, line_type=j % 3))
    types = {
        0: LineType(id=0, priority=0, base_width=2.0, style_profile_id=0),
        1: LineType(
            id=1, priority=1, base_width=3.0, style_profile_id=1,
            m_near=1.0, m_far=2.0, d_near=5.0, d_far=80.0,
        ),
        2: LineType(id=2, priority=2, base_width=4.0, style_profile_id=2),
    }
    return preprocess_scene(lines, line_types=types)


SCENE = busy_scene()


def run_both(frame):
    ctx = RenderContext(frame, SCENE.dataset)
    out = []
    for kern in (python_kernel, compiled):
        rgba = np.zeros((ctx.H, ctx.W, 4), dtype=np.float64)
        counts = np.zeros((ctx.H, ctx.W), dtype=np.int64)
        kern.render_rows(ctx, rgba, counts, 0, ctx.H)
        out.append((rgba, counts))
    return out


def assert_bitwise_equal(frame):
    (rgba_py, counts_py), (rgba_c, counts_c) = run_both(frame)
    assert np.array_equal(counts_py, counts_c)
    assert np.array_equal(rgba_py, rgba_c)  # exact, not approx


FRAMES = {
    "nadir": FrameSpec(
        camera=CameraPose(x=0, y=0, height=30, yaw=math.pi / 2),
        width=64, height=64, tolerance_px=1.5,
    ),
    "oblique": FrameSpec(
        camera=CameraPose(x=-5, y=-40, height=12, yaw=1.2, pitch=0.5),
        width=80, height=48, tolerance_px=2.0,
    ),
    "horizon": FrameSpec(
        camera=CameraPose(x=0, y=0, height=5, pitch=0.15),
        width=48, height=48, tolerance_px=0.5,
    ),
    "lens_refine": FrameSpec(
        camera=CameraPose(x=0, y=0, height=50, yaw=math.pi / 2),
        width=64, height=64, tolerance_px=4.0,
        lens=Lens(cx=0, cy=0, radius=8, factor=0.2),
    ),
    "lens_simplify": FrameSpec(
        camera=CameraPose(x=0, y=0, height=50, yaw=math.pi / 2),
        width=64, height=64, tolerance_px=1.0,
        lens=Lens(cx=2, cy=-3, radius=10, factor=5.0),
    ),
    "dynamic": FrameSpec(
        camera=CameraPose(x=0, y=0, height=60, yaw=math.pi / 2),
        width=64, height=64,
        flags=FrameFlags(dynamic_thickness=True, visibility_check=True, use_all_segments=True),
    ),
    "no_vis_orig": FrameSpec(
        camera=CameraPose(x=0, y=0, height=40, yaw=math.pi / 2),
        width=64, height=64,
        flags=FrameFlags(dynamic_thickness=False, visibility_check=False, use_all_segments=False),
    ),
}


@pytest.mark.parametrize("name", sorted(FRAMES))
def test_kernels_bitwise_identical(name):
    assert_bitwise_equal(FRAMES[name])


def test_random_cameras_bitwise_identical():
    rng = random.Random(3)
    for _ in range(10):
        frame = FrameSpec(
            camera=CameraPose(
                x=rng.uniform(-20, 20),
                y=rng.uniform(-20, 20),
                height=rng.uniform(2, 120),
                yaw=rng.uniform(0, 2 * math.pi),
                pitch=rng.uniform(0.2, math.pi / 2),
            ),
            width=40,
            height=40,
            tolerance_px=rng.uniform(0, 6),
        )
        assert_bitwise_equal(frame)
