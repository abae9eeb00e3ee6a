# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shading kernel.

A line-for-line transcription of ``_kernel_py`` in C double precision;
both kernels must produce bitwise identical frames.
"""
from libc.math cimport sqrt, floor, log2, INFINITY

import numpy as np


cdef inline bint _included(
    double[:, ::1] eval_pos,
    double[::1] e_star,
    double[::1] d_star,
    Py_ssize_t pid,
    double eye_x,
    double eye_y,
    double eye_z,
    bint lens_on,
    double lens_cx,
    double lens_cy,
    double lens_r,
    double lens_factor,
    double tol_px,
    double eps_scale,
) noexcept nogil:
    cdef double ex = eval_pos[pid, 0]
    cdef double ey = eval_pos[pid, 1]
    cdef double ddx = ex - eye_x
    cdef double ddy = ey - eye_y
    cdef double d = sqrt(ddx * ddx + ddy * ddy + eye_z * eye_z)
    cdef double ds = d_star[pid]
    cdef double fac = 1.0
    cdef double lx, ly, ld, arg, eps
    if lens_on:
        lx = ex - lens_cx
        ly = ey - lens_cy
        ld = sqrt(lx * lx + ly * ly)
        if lens_factor < 1.0:
            if ld <= lens_r + ds:
                fac = lens_factor
        elif ld <= lens_r - ds:
            fac = lens_factor
    arg = d - ds
    eps = 0.0 if arg <= 0.0 else tol_px * arg * eps_scale
    return e_star[pid] > fac * eps


def render_rows(ctx, double[:, :, ::1] rgba, long long[:, ::1] counts, int row0, int row1):
    cdef int W = ctx.W
    cdef int H = ctx.H
    cdef double eye_x = ctx.eye_x
    cdef double eye_y = ctx.eye_y
    cdef double eye_z = ctx.eye_z
    cdef double fx = ctx.fx, fy = ctx.fy, fz = ctx.fz
    cdef double rx = ctx.rx, ry = ctx.ry
    cdef double ux = ctx.ux, uy = ctx.uy, uz = ctx.uz
    cdef double tan_half = ctx.tan_half
    cdef double aspect = ctx.aspect
    cdef double tol_px = ctx.tol_px
    cdef double eps_scale = ctx.eps_scale
    cdef bint lens_on = ctx.lens_on
    cdef double lens_cx = ctx.lens_cx, lens_cy = ctx.lens_cy
    cdef double lens_r = ctx.lens_r, lens_factor = ctx.lens_factor
    cdef bint vis_check = ctx.vis_check
    cdef bint dynamic = ctx.dynamic

    cdef double[:, ::1] points = ctx.points
    cdef double[:, ::1] eval_pos = ctx.eval_pos
    cdef double[::1] e_star = ctx.e_star
    cdef double[::1] d_star = ctx.d_star
    cdef int[::1] seg_a = ctx.seg_a
    cdef int[::1] seg_b = ctx.seg_b
    cdef int[::1] seg_gen = ctx.seg_gen
    cdef int[::1] seg_spl = ctx.seg_spl
    cdef int[::1] seg_lt = ctx.seg_lt
    cdef long long[::1] lt_priority = ctx.lt_priority
    cdef double[::1] lt_base_w = ctx.lt_base_w
    cdef double[::1] lt_m_near = ctx.lt_m_near
    cdef double[::1] lt_m_far = ctx.lt_m_far
    cdef double[::1] lt_d_near = ctx.lt_d_near
    cdef double[::1] lt_d_far = ctx.lt_d_far
    cdef long long[::1] lt_style = ctx.lt_style
    cdef double bx0 = ctx.bbox0, by0 = ctx.bbox1, bx1 = ctx.bbox2, by1 = ctx.bbox3
    cdef int grid_w = ctx.grid_w
    cdef int grid_h = ctx.grid_h
    cdef long long[::1] cell_root = ctx.cell_root
    cdef long long[:, ::1] children = ctx.children
    cdef long long[::1] node_seg_off = ctx.node_seg_off
    cdef int[::1] node_seg_cnt = ctx.node_seg_cnt
    cdef int[::1] seg_refs = ctx.seg_refs
    cdef double cw = (bx1 - bx0) / grid_w
    cdef double ch = (by1 - by0) / grid_h
    cdef double[:, :, ::1] style_tex = ctx.style_tex
    cdef long long[::1] level_off = ctx.level_off
    cdef long long[::1] level_size = ctx.level_size
    cdef double[:, :, ::1] bg = ctx.bg

    cdef int py, px, cx, cy, ix, iy, level, style, n, i0
    cdef long long node, off, k, sid, best, gen, spl, lt, pri, best_pri, loff, j
    cdef long long tests
    cdef double ndc_y, ndc_y2, ndc_x, ndc_x2, dx, dy, dz, dx2, dy2, dz2, t, t2
    cdef double qx, qy, fpx, fpy, fp, fdx, fdy, d_frag
    cdef double nx0, ny0, nx1, ny1, mx, my
    cdef double ax, ay, sdx, sdy, len_sq, tt, wx, wy, dist
    cdef double span, w_t, width, hw, cov
    cdef double best_dist, best_hw, best_cov
    cdef double bg_r, bg_g, bg_b, bg_a, u, tpp, x, frac
    cdef double sr, sg, sb, sa, alpha

    with nogil:
        for py in range(row0, row1):
            ndc_y = (1.0 - 2.0 * (py + 0.5) / H) * tan_half
            ndc_y2 = (1.0 - 2.0 * (py + 1.5) / H) * tan_half
            for px in range(W):
                ndc_x = (2.0 * (px + 0.5) / W - 1.0) * tan_half * aspect
                dx = fx + ndc_x * rx + ndc_y * ux
                dy = fy + ndc_x * ry + ndc_y * uy
                dz = fz + ndc_y * uz
                if dz >= 0.0:
                    rgba[py, px, 0] = bg[py, px, 0]
                    rgba[py, px, 1] = bg[py, px, 1]
                    rgba[py, px, 2] = bg[py, px, 2]
                    rgba[py, px, 3] = bg[py, px, 3]
                    continue
                t = -eye_z / dz
                qx = eye_x + t * dx
                qy = eye_y + t * dy
                ndc_x2 = (2.0 * (px + 1.5) / W - 1.0) * tan_half * aspect
                dx2 = fx + ndc_x2 * rx + ndc_y2 * ux
                dy2 = fy + ndc_x2 * ry + ndc_y2 * uy
                dz2 = fz + ndc_y2 * uz
                t2 = -eye_z / dz2
                fpx = eye_x + t2 * dx2 - qx
                fpy = eye_y + t2 * dy2 - qy
                fp = sqrt(fpx * fpx + fpy * fpy)
                fdx = qx - eye_x
                fdy = qy - eye_y
                d_frag = sqrt(fdx * fdx + fdy * fdy + eye_z * eye_z)

                best = -1
                best_pri = 0
                best_dist = INFINITY
                best_hw = 0.0
                best_cov = 0.0
                tests = 0

                if bx0 <= qx <= bx1 and by0 <= qy <= by1:
                    cx = <int>((qx - bx0) / cw)
                    if cx > grid_w - 1:
                        cx = grid_w - 1
                    cy = <int>((qy - by0) / ch)
                    if cy > grid_h - 1:
                        cy = grid_h - 1
                    node = cell_root[cy * grid_w + cx]
                    nx0 = bx0 + cx * cw
                    ny0 = by0 + cy * ch
                    nx1 = nx0 + cw
                    ny1 = ny0 + ch
                    while node >= 0:
                        off = node_seg_off[node]
                        for k in range(node_seg_cnt[node]):
                            sid = seg_refs[off + k]
                            if vis_check:
                                gen = seg_gen[sid]
                                if gen >= 0 and not _included(
                                    eval_pos, e_star, d_star, gen,
                                    eye_x, eye_y, eye_z, lens_on,
                                    lens_cx, lens_cy, lens_r, lens_factor,
                                    tol_px, eps_scale,
                                ):
                                    continue
                                spl = seg_spl[sid]
                                if spl >= 0 and _included(
                                    eval_pos, e_star, d_star, spl,
                                    eye_x, eye_y, eye_z, lens_on,
                                    lens_cx, lens_cy, lens_r, lens_factor,
                                    tol_px, eps_scale,
                                ):
                                    continue
                            ax = points[seg_a[sid], 0]
                            ay = points[seg_a[sid], 1]
                            sdx = points[seg_b[sid], 0] - ax
                            sdy = points[seg_b[sid], 1] - ay
                            len_sq = sdx * sdx + sdy * sdy
                            if len_sq == 0.0:
                                wx = qx - ax
                                wy = qy - ay
                            else:
                                tt = ((qx - ax) * sdx + (qy - ay) * sdy) / len_sq
                                if tt < 0.0:
                                    tt = 0.0
                                elif tt > 1.0:
                                    tt = 1.0
                                wx = qx - (ax + tt * sdx)
                                wy = qy - (ay + tt * sdy)
                            dist = sqrt(wx * wx + wy * wy)
                            tests += 1
                            lt = seg_lt[sid]
                            if dynamic:
                                span = lt_d_far[lt] - lt_d_near[lt]
                                if span <= 0.0:
                                    w_t = 1.0 if d_frag >= lt_d_far[lt] else 0.0
                                else:
                                    w_t = (d_frag - lt_d_near[lt]) / span
                                    if w_t < 0.0:
                                        w_t = 0.0
                                    elif w_t > 1.0:
                                        w_t = 1.0
                                width = lt_base_w[lt] * (
                                    lt_m_near[lt] + w_t * (lt_m_far[lt] - lt_m_near[lt])
                                )
                            else:
                                width = lt_base_w[lt]
                            hw = width / 2.0
                            cov = 0.5 + (hw - dist) / fp
                            if cov > 1.0:
                                cov = 1.0
                            if cov <= 0.0:
                                continue
                            pri = lt_priority[lt]
                            if (
                                best < 0
                                or pri > best_pri
                                or (
                                    pri == best_pri
                                    and (dist < best_dist or (dist == best_dist and sid < best))
                                )
                            ):
                                best = sid
                                best_pri = pri
                                best_dist = dist
                                best_hw = hw
                                best_cov = cov
                        mx = (nx0 + nx1) / 2.0
                        my = (ny0 + ny1) / 2.0
                        ix = 1 if qx >= mx else 0
                        iy = 1 if qy >= my else 0
                        node = children[node, iy * 2 + ix]
                        if ix:
                            nx0 = mx
                        else:
                            nx1 = mx
                        if iy:
                            ny0 = my
                        else:
                            ny1 = my

                counts[py, px] = tests
                bg_r = bg[py, px, 0]
                bg_g = bg[py, px, 1]
                bg_b = bg[py, px, 2]
                bg_a = bg[py, px, 3]
                if best < 0:
                    rgba[py, px, 0] = bg_r
                    rgba[py, px, 1] = bg_g
                    rgba[py, px, 2] = bg_b
                    rgba[py, px, 3] = bg_a
                    continue
                u = best_dist / best_hw
                if u > 1.0:
                    u = 1.0
                tpp = fp * 256.0 / best_hw
                if tpp <= 1.0:
                    level = 0
                else:
                    level = <int>floor(log2(tpp))
                    if level > 8:
                        level = 8
                style = <int>lt_style[seg_lt[best]]
                n = <int>level_size[level]
                loff = level_off[level]
                if n == 1:
                    sr = style_tex[style, loff, 0]
                    sg = style_tex[style, loff, 1]
                    sb = style_tex[style, loff, 2]
                    sa = style_tex[style, loff, 3]
                else:
                    x = u * (n - 1)
                    i0 = <int>x
                    if i0 >= n - 1:
                        sr = style_tex[style, loff + n - 1, 0]
                        sg = style_tex[style, loff + n - 1, 1]
                        sb = style_tex[style, loff + n - 1, 2]
                        sa = style_tex[style, loff + n - 1, 3]
                    else:
                        frac = x - i0
                        j = loff + i0
                        sr = (1.0 - frac) * style_tex[style, j, 0] + frac * style_tex[style, j + 1, 0]
                        sg = (1.0 - frac) * style_tex[style, j, 1] + frac * style_tex[style, j + 1, 1]
                        sb = (1.0 - frac) * style_tex[style, j, 2] + frac * style_tex[style, j + 1, 2]
                        sa = (1.0 - frac) * style_tex[style, j, 3] + frac * style_tex[style, j + 1, 3]
                alpha = best_cov * sa
                rgba[py, px, 0] = sr * alpha + bg_r * (1.0 - alpha)
                rgba[py, px, 1] = sg * alpha + bg_g * (1.0 - alpha)
                rgba[py, px, 2] = sb * alpha + bg_b * (1.0 - alpha)
                rgba[py, px, 3] = alpha + bg_a * (1.0 - alpha)
