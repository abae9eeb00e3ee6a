import math
import random

import numpy as np
import pytest

from linelod.geometry import CameraPose, LineType, SourcePolyline
from linelod.pipeline import preprocess_scene
from linelod.raster import (
    FrameFlags,
    FrameSpec,
    coverage,
    effective_width,
    heatmap_image,
    pixel_to_world,
    render_frame,
    shade_fragment,
)

NORTH_UP = math.pi / 2  # yaw that maps screen-up to +y at nadir


def uniform_style(rgba):
    return {"id": 0, "stops": [{"u": 0.0, "rgba": list(rgba)}, {"u": 1.0, "rgba": list(rgba)}]}


def flat_scene(lines, line_types, styles):
    cfg = {
        "line_types": [],
        "styles": styles,
    }
    return preprocess_scene(lines, line_types=line_types, style_config=cfg)


# --- inverse projection -----------------------------------------------------


def test_nadir_center_pixel_hits_eye_footprint():
    cam = CameraPose(x=0, y=0, height=100, viewport_w=200, viewport_h=200)
    q = pixel_to_world(cam, 100.0, 100.0)
    assert q == pytest.approx((0.0, 0.0))


def test_horizontal_ray_misses_plane():
    cam = CameraPose(x=0, y=0, height=10, pitch=0.0, viewport_w=100, viewport_h=100)
    assert pixel_to_world(cam, 50.0, 50.0) is None


def test_forty_five_degree_pitch_center():
    h = 37.0
    cam = CameraPose(x=0, y=0, height=h, yaw=0.0, pitch=math.pi / 4)
    q = pixel_to_world(cam, cam.viewport_w / 2, cam.viewport_h / 2)
    assert q == pytest.approx((h, 0.0))


def test_yaw_rotates_view_azimuth():
    h = 20.0
    cam = CameraPose(x=5, y=-3, height=h, yaw=math.pi / 2, pitch=math.pi / 4)
    q = pixel_to_world(cam, cam.viewport_w / 2, cam.viewport_h / 2)
    assert q == pytest.approx((5.0, -3.0 + h))


def test_nadir_north_up_screen_axes():
    cam = CameraPose(
        x=0, y=0, height=100, yaw=NORTH_UP, fov_y=math.pi / 2, viewport_w=100, viewport_h=100
    )
    up = pixel_to_world(cam, 50.0, 10.0)
    right = pixel_to_world(cam, 90.0, 50.0)
    assert up[1] > 0 and abs(up[0]) < 1e-9
    assert right[0] > 0 and abs(right[1]) < 1e-9


# --- width and coverage -----------------------------------------------------


WIDE = LineType(id=0, base_width=10.0, m_near=1.0, m_far=3.0, d_near=100.0, d_far=300.0)


def test_effective_width_static():
    for d in (1.0, 150.0, 1e6):
        assert effective_width(WIDE, d, dynamic=False) == 10.0


def test_effective_width_dynamic_clamps_and_lerps():
    assert effective_width(WIDE, 50.0, True) == pytest.approx(10.0)
    assert effective_width(WIDE, 100.0, True) == pytest.approx(10.0)
    assert effective_width(WIDE, 200.0, True) == pytest.approx(20.0)
    assert effective_width(WIDE, 300.0, True) == pytest.approx(30.0)
    assert effective_width(WIDE, 5000.0, True) == pytest.approx(30.0)
    assert effective_width(WIDE, 5000.0, True) <= WIDE.base_width * WIDE.max_multiplier


def test_coverage_examples():
    assert coverage(0.0, 2.0, 1.0) == 1.0
    assert coverage(3.0, 3.0, 1.0) == 0.5
    assert coverage(3.5, 3.0, 1.0) == 0.0
    assert coverage(5.0, 3.0, 1.0) == 0.0
    assert 0.0 < coverage(3.2, 3.0, 1.0) < 0.5


# --- full-frame rendering ---------------------------------------------------


def nadir_line_setup(h=100.0, size=101, width_px=8.2, fov=math.pi / 2):
    # Width 8.2 px with the axis on a pixel center keeps every partially
    # covered pixel strictly inside the half-width, where index retrieval
    # is guaranteed; the analytic per-row coverage then holds exactly.
    """One horizontal world line through the view center, north-up nadir."""
    pixel = 2.0 * h * math.tan(fov / 2.0) / size
    lt = LineType(id=0, base_width=width_px * pixel, style_profile_id=0)
    res = flat_scene(
        [SourcePolyline(points=((-10 * h, 0.0), (10 * h, 0.0)))],
        {0: lt},
        [uniform_style((0.1, 0.2, 0.9, 1.0))],
    )
    cam = CameraPose(
        x=0, y=0, height=h, yaw=NORTH_UP, fov_y=fov, viewport_w=size, viewport_h=size
    )
    frame = FrameSpec(camera=cam, width=size, height=size, tolerance_px=1.0)
    return res, frame, pixel


def test_single_line_matches_analytic_row_coverage():
    res, frame, pixel = nadir_line_setup()
    out = render_frame(frame, res.dataset, kernel="python")
    size = frame.height
    footprint = pixel * math.sqrt(2.0)
    half = 4.1 * pixel
    for py in range(size):
        qy = (1.0 - 2.0 * (py + 0.5) / size) * math.tan(frame.camera.fov_y / 2) * 100.0
        want = min(max(0.5 + (half - abs(qy)) / footprint, 0.0), 1.0)
        # red channel: style 0.1 blended over the white background by coverage
        want_red = 0.1 * want + 1.0 * (1.0 - want)
        assert abs(out.rgba[py, size // 2, 0] / 255.0 - want_red) <= 1.0 / 255.0
        # opaque background keeps alpha saturated everywhere
        assert out.rgba[py, size // 2, 3] == 255


def test_single_line_profile_symmetric_with_full_interior():
    res, frame, pixel = nadir_line_setup()
    out = render_frame(frame, res.dataset, kernel="python")
    size = frame.height
    mid = size // 2
    col = out.rgba[:, mid, 0].astype(int)
    # symmetric about the center row (line axis sits on a pixel center)
    for off in range(1, 10):
        assert col[mid - off] == col[mid + off]
    # interior rows fully covered by the 8 px line
    for off in range(0, 3):
        assert out.rgba[mid + off, mid, 0] == round(0.1 * 255)
    # exactly one partial row per side, then background
    partial = [
        py
        for py in range(size)
        if 0.1 * 255 + 1 < out.rgba[py, mid, 0] < 254
    ]
    assert len(partial) == 2
    assert out.rgba[0, mid, 0] == 255 and out.rgba[size - 1, mid, 0] == 255


def test_empty_dataset_renders_background_only():
    res = flat_scene(
        [SourcePolyline(points=((1e6, 1e6), (1e6 + 1, 1e6)))],
        {0: LineType(id=0, base_width=0.001)},
        [uniform_style((0, 0, 0, 1))],
    )
    cam = CameraPose(x=0, y=0, height=50, viewport_w=32, viewport_h=32)
    frame = FrameSpec(camera=cam, width=32, height=32, background=(0.2, 0.4, 0.6, 1.0))
    out = render_frame(frame, res.dataset, kernel="python")
    assert (out.counts == 0).all()
    assert (out.rgba[..., 0] == round(0.2 * 255)).all()
    assert (out.rgba[..., 2] == round(0.6 * 255)).all()


def test_zero_area_viewport_rejected():
    res, frame, _ = nadir_line_setup(size=11)
    bad = FrameSpec(camera=frame.camera, width=0, height=10)
    with pytest.raises(ValueError):
        render_frame(bad, res.dataset)


def test_worker_count_does_not_change_output():
    res, frame, _ = nadir_line_setup(size=33)
    ref = render_frame(frame, res.dataset, workers=1, kernel="python")
    for workers in (2, 8):
        out = render_frame(frame, res.dataset, workers=workers, kernel="python")
        assert np.array_equal(out.rgba, ref.rgba)
        assert np.array_equal(out.counts, ref.counts)


def test_sky_pixels_get_background():
    cam = CameraPose(
        x=0, y=0, height=10, pitch=0.05, fov_y=math.pi / 3, viewport_w=21, viewport_h=21
    )
    res, _, _ = nadir_line_setup(size=21)
    frame = FrameSpec(camera=cam, width=21, height=21, background=(1, 0, 0, 1))
    out = render_frame(frame, res.dataset, kernel="python")
    # top rows look above the horizon
    assert (out.rgba[0, :, 0] == 255).all()
    assert (out.counts[0] == 0).all()


def test_heatmap_counts_and_ramp():
    res, frame, _ = nadir_line_setup(size=33)
    out = render_frame(frame, res.dataset, kernel="python")
    assert out.counts.max() > 0
    img = heatmap_image(out.counts)
    zero = out.counts == 0
    assert (img[zero] == 255).all()
    pos = ~zero
    assert (img[pos][:, 1] == 0).all()
    # ramp is monotone in count: larger count -> redder
    counts = np.array([[0, 1, 10, 1000]])
    ramp = heatmap_image(counts)
    assert ramp[0, 1, 0] < ramp[0, 2, 0] < ramp[0, 3, 0]


def test_magnification_edge_transition_at_most_two_pixels():
    # extreme zoom: line edges stay a crisp <= 2 px ramp
    res, frame, pixel = nadir_line_setup(h=2.0, size=101, width_px=40.2)
    out = render_frame(frame, res.dataset, kernel="python")
    col = out.rgba[:, 50, 0].astype(int)
    core = round(0.1 * 255)
    runs = []
    run = 0
    for v in col:
        if core < v < 255:
            run += 1
        elif run:
            runs.append(run)
            run = 0
    assert runs and max(runs) <= 2


def test_background_raster_nearest_sampling():
    res = flat_scene(
        [SourcePolyline(points=((1e6, 1e6), (1e6 + 1, 1e6)))],
        {0: LineType(id=0, base_width=0.001)},
        [uniform_style((0, 0, 0, 1))],
    )
    ras = np.zeros((2, 2, 4))
    ras[0, 0] = (1, 0, 0, 1)  # top-left = (-x.. no: x<mid, y>mid)
    ras[0, 1] = (0, 1, 0, 1)
    ras[1, 0] = (0, 0, 1, 1)
    ras[1, 1] = (1, 1, 1, 1)
    cam = CameraPose(
        x=0, y=0, height=10, yaw=NORTH_UP, fov_y=math.pi / 2, viewport_w=20, viewport_h=20
    )
    frame = FrameSpec(
        camera=cam,
        width=20,
        height=20,
        background_raster=ras,
        background_rect=(-10, -10, 10, 10),
    )
    out = render_frame(frame, res.dataset, kernel="python")
    assert tuple(out.rgba[2, 2][:3]) == (255, 0, 0)  # upper-left: x<0, y>0
    assert tuple(out.rgba[2, 17][:3]) == (0, 255, 0)
    assert tuple(out.rgba[17, 2][:3]) == (0, 0, 255)
    assert tuple(out.rgba[17, 17][:3]) == (255, 255, 255)


# --- fragment-level properties ---------------------------------------------


def crossing_scene():
    a = SourcePolyline(points=((-50, 0), (50, 0)), line_type=0)
    b = SourcePolyline(points=((0, -50), (0, 50)), line_type=1)
    types = {
        0: LineType(id=0, priority=0, base_width=6.0, style_profile_id=0),
        1: LineType(id=1, priority=1, base_width=6.0, style_profile_id=1),
    }
    styles = [uniform_style((1, 0, 0, 1)), dict(uniform_style((0, 1, 0, 1)), id=1)]
    return flat_scene([a, b], types, styles)


def test_shade_fragment_order_independent():
    res = crossing_scene()
    cam = CameraPose(x=0, y=0, height=40, yaw=NORTH_UP, viewport_w=64, viewport_h=64)
    frame = FrameSpec(camera=cam, width=64, height=64)
    rng = random.Random(7)
    probes = [(0.5, 0.5), (2.0, 0.1), (0.1, 2.0), (1.4, 1.4), (-2.9, 0.4)]
    for q in probes:
        base_color, base_tests = shade_fragment(q, 0.5, frame, res.dataset)
        ids = list(res.dataset.indexes["ap_static"].descend(*q))
        for _ in range(5):
            rng.shuffle(ids)
            color, tests = shade_fragment(q, 0.5, frame, res.dataset, candidate_ids=ids)
            assert color == base_color
            assert tests == base_tests


def test_priority_wins_at_crossing():
    res = crossing_scene()
    cam = CameraPose(x=0, y=0, height=40, yaw=NORTH_UP, viewport_w=64, viewport_h=64)
    frame = FrameSpec(camera=cam, width=64, height=64)
    color, _ = shade_fragment((0.0, 0.0), 0.5, frame, res.dataset)
    assert color[1] > color[0]  # green (priority 1) beats red


def test_no_candidates_gives_background_and_zero_tests():
    res = crossing_scene()
    cam = CameraPose(x=0, y=0, height=40, viewport_w=64, viewport_h=64)
    frame = FrameSpec(camera=cam, width=64, height=64, background=(0.3, 0.3, 0.3, 1.0))
    # far outside the index: descent yields nothing
    color, tests = shade_fragment((500.0, 500.0), 0.5, frame, res.dataset)
    assert tests == 0
    assert color == (0.3, 0.3, 0.3, 1.0)
    # candidates exist but none covers the point: still background
    color, tests = shade_fragment((40.0, 40.0), 0.5, frame, res.dataset)
    assert tests > 0
    assert color == (0.3, 0.3, 0.3, 1.0)


def joint_scene():
    """Two equal-priority styled lines meeting at a right angle."""
    a = SourcePolyline(points=((-30, 0), (0, 0)), line_type=0)
    b = SourcePolyline(points=((0, 0), (0, 30)), line_type=1)
    types = {
        0: LineType(id=0, priority=1, base_width=8.0, style_profile_id=0),
        1: LineType(id=1, priority=1, base_width=8.0, style_profile_id=1),
    }
    styles = [uniform_style((1, 0, 0, 1)), dict(uniform_style((0, 0, 1, 1)), id=1)]
    return types, styles, a, b


def test_right_angle_joint_picks_nearer_line_color():
    types, styles, a, b = joint_scene()
    both = flat_scene([a, b], types, styles)
    only_a = flat_scene([a], {0: types[0]}, [styles[0]])
    only_b = flat_scene([b], {1: types[1]}, [styles[1]])
    cam = CameraPose(
        x=0, y=0, height=30, yaw=NORTH_UP, fov_y=math.pi / 2, viewport_w=61, viewport_h=61
    )

    def frame_for(res):
        return FrameSpec(camera=cam, width=61, height=61)

    img_both = render_frame(frame_for(both), both.dataset, kernel="python").rgba
    img_a = render_frame(frame_for(only_a), only_a.dataset, kernel="python").rgba
    img_b = render_frame(frame_for(only_b), only_b.dataset, kernel="python").rgba
    # probe pixels in the cap-overlap quadrant (x < 0, y > 0 near the corner)
    pixel = 2.0 * 30.0 / 61
    checked = 0
    for py in range(24, 30):  # wy > 0: above the horizontal line
        for px in range(24, 30):  # wx < 0: left of the vertical line
            wx = (px + 0.5 - 30.5) * pixel
            wy = (30.5 - py - 0.5) * pixel
            da = abs(wy)  # distance to the horizontal line (runs along x <= 0)
            db = abs(wx)  # distance to the vertical line (runs along y >= 0)
            if max(da, db) > 3.0 or abs(da - db) < 0.5:
                continue  # outside both cores or too close to the tie
            want = img_a if da < db else img_b
            assert tuple(img_both[py, px]) == tuple(want[py, px])
            checked += 1
    assert checked >= 4


def test_joint_continuity_no_gap_at_any_lod():
    # a sharp polyline corner rendered coarse and fine never shows gaps
    line = SourcePolyline(points=((-20, -10), (0, 10), (20, -10)))
    lt = LineType(id=0, base_width=4.0, style_profile_id=0)
    res = flat_scene([line], {0: lt}, [uniform_style((0, 0, 0, 1))])
    cam = CameraPose(
        x=0, y=0, height=25, yaw=NORTH_UP, fov_y=math.pi / 2, viewport_w=81, viewport_h=81
    )
    pixel = 2.0 * 25.0 / 81
    for tol in (0.0, 2.0, 50.0):
        frame = FrameSpec(camera=cam, width=81, height=81, tolerance_px=tol)
        out = render_frame(frame, res.dataset, kernel="python")
        from linelod.visibility import ThresholdPolicy, simplify_polyline

        policy = ThresholdPolicy.for_camera(cam, tol)
        chain = simplify_polyline(res.dataset, res.dataset.polylines[0], cam, policy)
        pts = res.dataset.points
        from linelod.geometry import distance_point_to_segment

        for py in range(81):
            for px in range(81):
                if out.rgba[py, px, 0] == 255:  # background pixel
                    q = ((px + 0.5 - 40.5) * pixel, (40.5 - py - 0.5) * pixel)
                    d = min(
                        distance_point_to_segment(q, tuple(pts[i]), tuple(pts[j]))
                        for i, j in zip(chain, chain[1:])
                    )
                    assert d >= 2.0 - pixel * math.sqrt(2.0)


def test_onvs_equals_full_detail_avs():
    rng = random.Random(0)
    lines = []
    for j in range(4):  # one y-band per line keeps the scene dependee-free
        xs = np.cumsum([rng.uniform(1, 4) for _ in range(6)])
        pts = tuple((float(x) - 8, 20.0 * j + rng.uniform(-4, 4)) for x in xs)
        lines.append(SourcePolyline(points=pts))
    lt = {0: LineType(id=0, base_width=1.5, style_profile_id=0)}
    res = flat_scene(lines, lt, [uniform_style((0.2, 0.2, 0.2, 1))])
    assert not res.report["dependee_points"]
    cam = CameraPose(x=0, y=30, height=40, yaw=NORTH_UP, viewport_w=49, viewport_h=49)
    avs = FrameSpec(
        camera=cam, width=49, height=49, tolerance_px=0.0,
        flags=FrameFlags(False, True, True),
    )
    onvs = FrameSpec(
        camera=cam, width=49, height=49, tolerance_px=0.0,
        flags=FrameFlags(False, False, False),
    )
    img1 = render_frame(avs, res.dataset, kernel="python").rgba
    img2 = render_frame(onvs, res.dataset, kernel="python").rgba
    assert np.array_equal(img1, img2)


def test_dynamic_thickness_widens_far_lines():
    lt = LineType(
        id=0, base_width=4.0, m_near=1.0, m_far=4.0, d_near=10.0, d_far=60.0,
        style_profile_id=0,
    )
    res = flat_scene(
        [SourcePolyline(points=((-100, 0), (100, 0)))],
        {0: lt},
        [uniform_style((0, 0, 0, 1))],
    )
    cam = CameraPose(x=0, y=0, height=50, yaw=NORTH_UP, viewport_w=41, viewport_h=41)
    static = FrameSpec(camera=cam, width=41, height=41, flags=FrameFlags(False, True, True))
    dyn = FrameSpec(camera=cam, width=41, height=41, flags=FrameFlags(True, True, True))
    img_s = render_frame(static, res.dataset, kernel="python").rgba
    img_d = render_frame(dyn, res.dataset, kernel="python").rgba
    ink_s = (img_s[..., 0] < 250).sum()
    ink_d = (img_d[..., 0] < 250).sum()
    assert ink_d > ink_s
