"""Pure-Python shading kernel.

Arithmetic here is the reference; the compiled kernel mirrors it
expression-for-expression in double precision so both produce bitwise
identical frames.
"""
from __future__ import annotations

import math


def render_rows(ctx, rgba, counts, row0: int, row1: int) -> None:
    W = ctx.W
    H = ctx.H
    eye_x, eye_y, eye_z = ctx.eye_x, ctx.eye_y, ctx.eye_z
    fx, fy, fz = ctx.fx, ctx.fy, ctx.fz
    rx, ry = ctx.rx, ctx.ry
    ux, uy, uz = ctx.ux, ctx.uy, ctx.uz
    tan_half = ctx.tan_half
    aspect = ctx.aspect
    tol_px = ctx.tol_px
    eps_scale = ctx.eps_scale
    lens_on = ctx.lens_on
    lens_cx, lens_cy = ctx.lens_cx, ctx.lens_cy
    lens_r, lens_factor = ctx.lens_r, ctx.lens_factor
    vis_check = ctx.vis_check
    dynamic = ctx.dynamic

    points = ctx.points
    eval_pos = ctx.eval_pos
    e_star = ctx.e_star
    d_star = ctx.d_star
    seg_a, seg_b = ctx.seg_a, ctx.seg_b
    seg_gen, seg_spl, seg_lt = ctx.seg_gen, ctx.seg_spl, ctx.seg_lt
    lt_priority = ctx.lt_priority
    lt_base_w = ctx.lt_base_w
    lt_m_near, lt_m_far = ctx.lt_m_near, ctx.lt_m_far
    lt_d_near, lt_d_far = ctx.lt_d_near, ctx.lt_d_far
    lt_style = ctx.lt_style
    bx0, by0, bx1, by1 = ctx.bbox0, ctx.bbox1, ctx.bbox2, ctx.bbox3
    grid_w, grid_h = ctx.grid_w, ctx.grid_h
    cell_root = ctx.cell_root
    children = ctx.children
    node_seg_off = ctx.node_seg_off
    node_seg_cnt = ctx.node_seg_cnt
    seg_refs = ctx.seg_refs
    cw = (bx1 - bx0) / grid_w
    ch = (by1 - by0) / grid_h
    style_tex = ctx.style_tex
    level_off = ctx.level_off
    level_size = ctx.level_size
    bg = ctx.bg

    def included(pid: int) -> bool:
        ex = eval_pos[pid, 0]
        ey = eval_pos[pid, 1]
        ddx = ex - eye_x
        ddy = ey - eye_y
        d = math.sqrt(ddx * ddx + ddy * ddy + eye_z * eye_z)
        ds = d_star[pid]
        fac = 1.0
        if lens_on:
            lx = ex - lens_cx
            ly = ey - lens_cy
            ld = math.sqrt(lx * lx + ly * ly)
            if lens_factor < 1.0:
                if ld <= lens_r + ds:
                    fac = lens_factor
            elif ld <= lens_r - ds:
                fac = lens_factor
        arg = d - ds
        eps = 0.0 if arg <= 0.0 else tol_px * arg * eps_scale
        return e_star[pid] > fac * eps

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
            # footprint from the diagonal neighbor ray (hits whenever we do)
            ndc_x2 = (2.0 * (px + 1.5) / W - 1.0) * tan_half * aspect
            dx2 = fx + ndc_x2 * rx + ndc_y2 * ux
            dy2 = fy + ndc_x2 * ry + ndc_y2 * uy
            dz2 = fz + ndc_y2 * uz
            t2 = -eye_z / dz2
            fpx = eye_x + t2 * dx2 - qx
            fpy = eye_y + t2 * dy2 - qy
            fp = math.sqrt(fpx * fpx + fpy * fpy)
            fdx = qx - eye_x
            fdy = qy - eye_y
            d_frag = math.sqrt(fdx * fdx + fdy * fdy + eye_z * eye_z)

            best = -1
            best_pri = 0
            best_dist = math.inf
            best_hw = 0.0
            best_cov = 0.0
            tests = 0

            if bx0 <= qx <= bx1 and by0 <= qy <= by1:
                cx = int((qx - bx0) / cw)
                if cx > grid_w - 1:
                    cx = grid_w - 1
                cy = int((qy - by0) / ch)
                if cy > grid_h - 1:
                    cy = grid_h - 1
                node = int(cell_root[cy * grid_w + cx])
                nx0 = bx0 + cx * cw
                ny0 = by0 + cy * ch
                nx1 = nx0 + cw
                ny1 = ny0 + ch
                while node >= 0:
                    off = int(node_seg_off[node])
                    for k in range(int(node_seg_cnt[node])):
                        sid = int(seg_refs[off + k])
                        if vis_check:
                            gen = seg_gen[sid]
                            if gen >= 0 and not included(gen):
                                continue
                            spl = seg_spl[sid]
                            if spl >= 0 and included(spl):
                                continue
                        ia = seg_a[sid]
                        ib = seg_b[sid]
                        ax = points[ia, 0]
                        ay = points[ia, 1]
                        sdx = points[ib, 0] - ax
                        sdy = points[ib, 1] - ay
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
                        dist = math.sqrt(wx * wx + wy * wy)
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
                    node = int(children[node, iy * 2 + ix])
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
                level = int(math.floor(math.log2(tpp)))
                if level > 8:
                    level = 8
            style = int(lt_style[seg_lt[best]])
            n = int(level_size[level])
            loff = int(level_off[level])
            if n == 1:
                sr = style_tex[style, loff, 0]
                sg = style_tex[style, loff, 1]
                sb = style_tex[style, loff, 2]
                sa = style_tex[style, loff, 3]
            else:
                x = u * (n - 1)
                i0 = int(x)
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
