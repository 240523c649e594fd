"""Pure-Python geometric kernels.

This module is the fallback used when the compiled ``_ckernels`` extension is
unavailable, and the reference the extension is tested against. Both modules
expose exactly the same functions with the same return conventions.

Segment arrays are flat sequences of floats ``[x0, y0, x1, y1, ...]`` with
four values per segment; rings are flat closed coordinate sequences
``[x0, y0, ..., xn, yn]`` with ``(xn, yn) == (x0, y0)``.

Intersection kinds returned by :func:`seg_intersection`::

    NONE     (0,)
    TOUCH    (1, x, y)             a shared point that is a vertex of either segment
    CROSS    (2, x, y)             proper crossing of both segment interiors
    OVERLAP  (3, x1, y1, x2, y2)   collinear overlap of positive length

TOUCH and OVERLAP coordinates are always copied from input vertices, so they
compare exactly equal to the vertices they came from.
"""

from fractions import Fraction

NONE = 0
TOUCH = 1
CROSS = 2
OVERLAP = 3

# Breakpoints closer than this (in coordinate units) along a segment are merged.
SNAP_EPS = 1e-9

_EPS = 2.0 ** -53
CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


def orient_exact(ax, ay, bx, by, cx, cy):
    F = Fraction
    det = (F(ax) - F(cx)) * (F(by) - F(cy)) - (F(ay) - F(cy)) * (F(bx) - F(cx))
    return (det > 0) - (det < 0)


def orient2d(ax, ay, bx, by, cx, cy):
    """Sign of the turn a -> b -> c: 1 left (ccw), -1 right, 0 collinear.

    Floating-point filter with Shewchuk's static error bound; falls back to
    exact rational arithmetic when the filter cannot certify the sign.
    """
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return (det > 0.0) - (det < 0.0)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return (det > 0.0) - (det < 0.0)
        detsum = -detleft - detright
    else:
        return (det > 0.0) - (det < 0.0)
    if det >= CCW_ERRBOUND * detsum:
        return 1
    if -det >= CCW_ERRBOUND * detsum:
        return -1
    return orient_exact(ax, ay, bx, by, cx, cy)


def seg_intersection(ax, ay, bx, by, cx, cy, dx, dy):
    """Classify the intersection of closed segments ab and cd."""
    if (ax if ax > bx else bx) < (cx if cx < dx else dx):
        return (NONE,)
    if (cx if cx > dx else dx) < (ax if ax < bx else bx):
        return (NONE,)
    if (ay if ay > by else by) < (cy if cy < dy else dy):
        return (NONE,)
    if (cy if cy > dy else dy) < (ay if ay < by else by):
        return (NONE,)

    o1 = orient2d(ax, ay, bx, by, cx, cy)
    o2 = orient2d(ax, ay, bx, by, dx, dy)
    if o1 == 0 and o2 == 0:
        return _collinear(ax, ay, bx, by, cx, cy, dx, dy)
    if o1 * o2 > 0:
        return (NONE,)
    o3 = orient2d(cx, cy, dx, dy, ax, ay)
    o4 = orient2d(cx, cy, dx, dy, bx, by)
    if o3 * o4 > 0:
        return (NONE,)
    if o1 == 0:
        return (TOUCH, cx, cy)
    if o2 == 0:
        return (TOUCH, dx, dy)
    if o3 == 0:
        return (TOUCH, ax, ay)
    if o4 == 0:
        return (TOUCH, bx, by)

    rx = bx - ax
    ry = by - ay
    sx = dx - cx
    sy = dy - cy
    t = ((cx - ax) * sy - (cy - ay) * sx) / (rx * sy - ry * sx)
    x = ax + t * rx
    y = ay + t * ry
    # keep the computed point inside both segment boxes
    x = min(max(x, min(ax, bx), min(cx, dx)), max(ax, bx), max(cx, dx))
    y = min(max(y, min(ay, by), min(cy, dy)), max(ay, by), max(cy, dy))
    return (CROSS, x, y)


def _collinear(ax, ay, bx, by, cx, cy, dx, dy):
    # project on the dominant axis of ab (or cd when ab is degenerate)
    if ax != bx or ay != by:
        use_x = abs(bx - ax) >= abs(by - ay)
    elif cx != dx or cy != dy:
        use_x = abs(dx - cx) >= abs(dy - cy)
    elif ax == cx and ay == cy:
        return (TOUCH, ax, ay)
    else:
        return (NONE,)
    if use_x:
        ka, kb, kc, kd = ax, bx, cx, dx
    else:
        ka, kb, kc, kd = ay, by, cy, dy
    if ka <= kb:
        lo1, hi1 = (ka, ax, ay), (kb, bx, by)
    else:
        lo1, hi1 = (kb, bx, by), (ka, ax, ay)
    if kc <= kd:
        lo2, hi2 = (kc, cx, cy), (kd, dx, dy)
    else:
        lo2, hi2 = (kd, dx, dy), (kc, cx, cy)
    lo = lo1 if lo1[0] >= lo2[0] else lo2
    hi = hi1 if hi1[0] <= hi2[0] else hi2
    if lo[0] > hi[0]:
        return (NONE,)
    if lo[0] == hi[0]:
        return (TOUCH, lo[1], lo[2])
    return (OVERLAP, lo[1], lo[2], hi[1], hi[2])


def split_segments(segs_a, segs_b):
    """Node every segment of ``segs_a`` against all segments of ``segs_b``.

    Returns ``(pieces, nodes)``. ``pieces`` holds one ``(mx, my, on)`` tuple
    per sub-segment of A between consecutive intersection points, where
    ``(mx, my)`` is the piece midpoint and ``on`` is 0 when the piece does not
    lie on B, 1 when it overlaps a B segment running the same direction and
    -1 for the opposite direction. ``nodes`` lists every intersection point
    (duplicates possible).
    """
    pieces = []
    nodes = []
    nb = len(segs_b)
    for i in range(0, len(segs_a), 4):
        ax = segs_a[i]
        ay = segs_a[i + 1]
        bx = segs_a[i + 2]
        by = segs_a[i + 3]
        ddx = bx - ax
        ddy = by - ay
        use_x = abs(ddx) >= abs(ddy)
        span = abs(ddx) if use_x else abs(ddy)
        if span == 0.0:
            continue
        minx = ax if ax < bx else bx
        maxx = ax if ax > bx else bx
        miny = ay if ay < by else by
        maxy = ay if ay > by else by
        breaks = [0.0, 1.0]
        overlaps = []
        for j in range(0, nb, 4):
            cx = segs_b[j]
            cy = segs_b[j + 1]
            ex = segs_b[j + 2]
            ey = segs_b[j + 3]
            if (cx < minx and ex < minx) or (cx > maxx and ex > maxx):
                continue
            if (cy < miny and ey < miny) or (cy > maxy and ey > maxy):
                continue
            r = seg_intersection(ax, ay, bx, by, cx, cy, ex, ey)
            kind = r[0]
            if kind == NONE:
                continue
            if kind == OVERLAP:
                if use_x:
                    t0 = (r[1] - ax) / ddx
                    t1 = (r[3] - ax) / ddx
                else:
                    t0 = (r[2] - ay) / ddy
                    t1 = (r[4] - ay) / ddy
                if t0 > t1:
                    t0, t1 = t1, t0
                same = 1 if ddx * (ex - cx) + ddy * (ey - cy) > 0 else -1
                overlaps.append((t0, t1, same))
                breaks.append(t0)
                breaks.append(t1)
                nodes.append((r[1], r[2]))
                nodes.append((r[3], r[4]))
            else:
                t = (r[1] - ax) / ddx if use_x else (r[2] - ay) / ddy
                breaks.append(t)
                nodes.append((r[1], r[2]))
        breaks.sort()
        tol = SNAP_EPS / span
        uniq = [0.0]
        for t in breaks:
            if t - uniq[-1] > tol:
                uniq.append(t)
        if uniq[-1] != 1.0:
            if len(uniq) > 1 and 1.0 - uniq[-1] <= tol:
                uniq[-1] = 1.0
            else:
                uniq.append(1.0)
        for k in range(len(uniq) - 1):
            tm = 0.5 * (uniq[k] + uniq[k + 1])
            on = 0
            for o0, o1, same in overlaps:
                if o0 <= tm <= o1:
                    on = same
                    break
            pieces.append((ax + tm * ddx, ay + tm * ddy, on))
    return pieces, nodes


def point_in_ring(x, y, ring):
    """Locate a point against a closed ring: 1 inside, 0 on it, -1 outside."""
    inside = False
    n = len(ring) - 2
    for i in range(0, n, 2):
        x1 = ring[i]
        y1 = ring[i + 1]
        x2 = ring[i + 2]
        y2 = ring[i + 3]
        if (y1 > y) != (y2 > y):
            o = orient2d(x1, y1, x2, y2, x, y)
            if o == 0:
                return 0
            if (o > 0) == (y2 > y1):
                inside = not inside
        elif y1 == y and y2 == y:
            if (x1 <= x <= x2) or (x2 <= x <= x1):
                return 0
        elif (y1 == y and x1 == x) or (y2 == y and x2 == x):
            return 0
    return 1 if inside else -1


def point_on_segments(x, y, segs):
    for i in range(0, len(segs), 4):
        x1 = segs[i]
        y1 = segs[i + 1]
        x2 = segs[i + 2]
        y2 = segs[i + 3]
        if x < (x1 if x1 < x2 else x2) or x > (x1 if x1 > x2 else x2):
            continue
        if y < (y1 if y1 < y2 else y2) or y > (y1 if y1 > y2 else y2):
            continue
        if orient2d(x1, y1, x2, y2, x, y) == 0:
            return True
    return False


def intersecting_pairs(segs):
    """All pairs of segments that share at least one point.

    Sort-and-sweep on x. Returns tuples ``(i, j, *intersection)`` with
    ``i < j`` segment ordinals and the :func:`seg_intersection` result
    flattened after them.
    """
    n = len(segs) // 4
    lo = [0.0] * n
    for k in range(n):
        a = segs[4 * k]
        b = segs[4 * k + 2]
        lo[k] = a if a < b else b
    order = sorted(range(n), key=lo.__getitem__)
    out = []
    for p in range(n):
        i = order[p]
        ax = segs[4 * i]
        ay = segs[4 * i + 1]
        bx = segs[4 * i + 2]
        by = segs[4 * i + 3]
        hix = ax if ax > bx else bx
        for q in range(p + 1, n):
            j = order[q]
            if lo[j] > hix:
                break
            r = seg_intersection(ax, ay, bx, by, segs[4 * j], segs[4 * j + 1],
                                 segs[4 * j + 2], segs[4 * j + 3])
            if r[0] != NONE:
                if i < j:
                    out.append((i, j) + r)
                else:
                    out.append((j, i) + r)
    return out
