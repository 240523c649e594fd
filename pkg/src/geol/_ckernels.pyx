# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometric kernels.

Drop-in replacement for ``geol._pykernels``: same functions, same return
values, same exact-arithmetic fallback. Flat coordinate arguments may be any
buffer of doubles (``array('d')``, numpy) or a plain sequence of floats.
"""

from array import array

from geol._pykernels import orient_exact, SNAP_EPS as _SNAP_EPS

cdef enum:
    NONE = 0
    TOUCH = 1
    CROSS = 2
    OVERLAP = 3

cdef double CCW_ERRBOUND_C = (3.0 + 16.0 * 2.0 ** -53) * 2.0 ** -53
cdef double SNAP_EPS_C = _SNAP_EPS

SNAP_EPS = _SNAP_EPS
CCW_ERRBOUND = CCW_ERRBOUND_C


cdef inline double _min(double a, double b) nogil:
    return a if a < b else b


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


cdef const double[:] _buf(obj):
    try:
        return obj
    except (TypeError, ValueError):
        return array("d", obj)


cdef int _orient(double ax, double ay, double bx, double by, double cx, double cy) except? -2:
    cdef double detleft = (ax - cx) * (by - cy)
    cdef double detright = (ay - cy) * (bx - cx)
    cdef double det = detleft - detright
    cdef double detsum
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
    if det >= CCW_ERRBOUND_C * detsum:
        return 1
    if -det >= CCW_ERRBOUND_C * detsum:
        return -1
    return orient_exact(ax, ay, bx, by, cx, cy)


def orient2d(double ax, double ay, double bx, double by, double cx, double cy):
    """Sign of the turn a -> b -> c: 1 left (ccw), -1 right, 0 collinear."""
    return _orient(ax, ay, bx, by, cx, cy)


cdef tuple _collinear(double ax, double ay, double bx, double by,
                      double cx, double cy, double dx, double dy):
    cdef bint use_x
    cdef double ka, kb, kc, kd
    cdef double lo1k, lo1x, lo1y, hi1k, hi1x, hi1y
    cdef double lo2k, lo2x, lo2y, hi2k, hi2x, hi2y
    cdef double lok, lox, loy, hik, hix, hiy
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
        lo1k, lo1x, lo1y, hi1k, hi1x, hi1y = ka, ax, ay, kb, bx, by
    else:
        lo1k, lo1x, lo1y, hi1k, hi1x, hi1y = kb, bx, by, ka, ax, ay
    if kc <= kd:
        lo2k, lo2x, lo2y, hi2k, hi2x, hi2y = kc, cx, cy, kd, dx, dy
    else:
        lo2k, lo2x, lo2y, hi2k, hi2x, hi2y = kd, dx, dy, kc, cx, cy
    if lo1k >= lo2k:
        lok, lox, loy = lo1k, lo1x, lo1y
    else:
        lok, lox, loy = lo2k, lo2x, lo2y
    if hi1k <= hi2k:
        hik, hix, hiy = hi1k, hi1x, hi1y
    else:
        hik, hix, hiy = hi2k, hi2x, hi2y
    if lok > hik:
        return (NONE,)
    if lok == hik:
        return (TOUCH, lox, loy)
    return (OVERLAP, lox, loy, hix, hiy)


cdef tuple _seg_intersection(double ax, double ay, double bx, double by,
                             double cx, double cy, double dx, double dy):
    cdef int o1, o2, o3, o4
    cdef double rx, ry, sx, sy, t, x, y
    if _max(ax, bx) < _min(cx, dx) or _max(cx, dx) < _min(ax, bx):
        return (NONE,)
    if _max(ay, by) < _min(cy, dy) or _max(cy, dy) < _min(ay, by):
        return (NONE,)
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    if o1 == 0 and o2 == 0:
        return _collinear(ax, ay, bx, by, cx, cy, dx, dy)
    if o1 * o2 > 0:
        return (NONE,)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
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
    x = _min(_max(_max(x, _min(ax, bx)), _min(cx, dx)), _min(_max(ax, bx), _max(cx, dx)))
    y = _min(_max(_max(y, _min(ay, by)), _min(cy, dy)), _min(_max(ay, by), _max(cy, dy)))
    return (CROSS, x, y)


def seg_intersection(double ax, double ay, double bx, double by,
                     double cx, double cy, double dx, double dy):
    """Classify the intersection of closed segments ab and cd."""
    return _seg_intersection(ax, ay, bx, by, cx, cy, dx, dy)


def split_segments(segs_a, segs_b):
    """Node every segment of ``segs_a`` against all segments of ``segs_b``."""
    cdef const double[:] A = _buf(segs_a)
    cdef const double[:] Bv = _buf(segs_b)
    cdef Py_ssize_t i, j, k, na = A.shape[0], nb = Bv.shape[0]
    cdef double ax, ay, bx, by, cx, cy, ex, ey, ddx, ddy, span, tol, t, t0, t1, tm, last
    cdef double minx, maxx, miny, maxy
    cdef bint use_x
    cdef int kind, on, same
    cdef tuple r
    cdef list pieces = [], nodes = [], breaks, overlaps, uniq
    for i in range(0, na, 4):
        ax = A[i]
        ay = A[i + 1]
        bx = A[i + 2]
        by = A[i + 3]
        ddx = bx - ax
        ddy = by - ay
        use_x = abs(ddx) >= abs(ddy)
        span = abs(ddx) if use_x else abs(ddy)
        if span == 0.0:
            continue
        minx = _min(ax, bx)
        maxx = _max(ax, bx)
        miny = _min(ay, by)
        maxy = _max(ay, by)
        breaks = [0.0, 1.0]
        overlaps = []
        for j in range(0, nb, 4):
            cx = Bv[j]
            cy = Bv[j + 1]
            ex = Bv[j + 2]
            ey = Bv[j + 3]
            if (cx < minx and ex < minx) or (cx > maxx and ex > maxx):
                continue
            if (cy < miny and ey < miny) or (cy > maxy and ey > maxy):
                continue
            r = _seg_intersection(ax, ay, bx, by, cx, cy, ex, ey)
            kind = r[0]
            if kind == NONE:
                continue
            if kind == OVERLAP:
                if use_x:
                    t0 = (<double>r[1] - ax) / ddx
                    t1 = (<double>r[3] - ax) / ddx
                else:
                    t0 = (<double>r[2] - ay) / ddy
                    t1 = (<double>r[4] - ay) / ddy
                if t0 > t1:
                    t0, t1 = t1, t0
                same = 1 if ddx * (ex - cx) + ddy * (ey - cy) > 0 else -1
                overlaps.append((t0, t1, same))
                breaks.append(t0)
                breaks.append(t1)
                nodes.append((r[1], r[2]))
                nodes.append((r[3], r[4]))
            else:
                if use_x:
                    t = (<double>r[1] - ax) / ddx
                else:
                    t = (<double>r[2] - ay) / ddy
                breaks.append(t)
                nodes.append((r[1], r[2]))
        breaks.sort()
        tol = SNAP_EPS_C / span
        uniq = [0.0]
        last = 0.0
        for t in breaks:
            if t - last > tol:
                uniq.append(t)
                last = t
        if last != 1.0:
            if len(uniq) > 1 and 1.0 - last <= tol:
                uniq[len(uniq) - 1] = 1.0
            else:
                uniq.append(1.0)
        for k in range(len(uniq) - 1):
            tm = 0.5 * (<double>uniq[k] + <double>uniq[k + 1])
            on = 0
            for t0, t1, same in overlaps:
                if t0 <= tm <= t1:
                    on = same
                    break
            pieces.append((ax + tm * ddx, ay + tm * ddy, on))
    return pieces, nodes


def point_in_ring(double x, double y, ring):
    """Locate a point against a closed ring: 1 inside, 0 on it, -1 outside."""
    cdef const double[:] R = _buf(ring)
    cdef Py_ssize_t i, n = R.shape[0] - 2
    cdef double x1, y1, x2, y2
    cdef bint inside = False
    cdef int o
    for i in range(0, n, 2):
        x1 = R[i]
        y1 = R[i + 1]
        x2 = R[i + 2]
        y2 = R[i + 3]
        if (y1 > y) != (y2 > y):
            o = _orient(x1, y1, x2, y2, x, y)
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


def point_on_segments(double x, double y, segs):
    cdef const double[:] S = _buf(segs)
    cdef Py_ssize_t i
    cdef double x1, y1, x2, y2
    for i in range(0, S.shape[0], 4):
        x1 = S[i]
        y1 = S[i + 1]
        x2 = S[i + 2]
        y2 = S[i + 3]
        if x < _min(x1, x2) or x > _max(x1, x2):
            continue
        if y < _min(y1, y2) or y > _max(y1, y2):
            continue
        if _orient(x1, y1, x2, y2, x, y) == 0:
            return True
    return False


def intersecting_pairs(segs):
    """All pairs of segments that share at least one point (x sweep)."""
    cdef const double[:] S = _buf(segs)
    cdef Py_ssize_t n = S.shape[0] // 4, p, q, i, j
    cdef double ax, ay, bx, by, hix
    cdef list lo = [_min(S[4 * k], S[4 * k + 2]) for k in range(n)]
    cdef list order = sorted(range(n), key=lo.__getitem__)
    cdef list out = []
    cdef tuple r
    for p in range(n):
        i = order[p]
        ax = S[4 * i]
        ay = S[4 * i + 1]
        bx = S[4 * i + 2]
        by = S[4 * i + 3]
        hix = _max(ax, bx)
        for q in range(p + 1, n):
            j = order[q]
            if <double>lo[j] > hix:
                break
            r = _seg_intersection(ax, ay, bx, by, S[4 * j], S[4 * j + 1],
                                  S[4 * j + 2], S[4 * j + 3])
            if r[0] != NONE:
                if i < j:
                    out.append((i, j) + r)
                else:
                    out.append((j, i) + r)
    return out
