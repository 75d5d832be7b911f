# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""DE-9IM intersection-matrix kernel for LineStrings and Polygons.

This module is valid pure Python and is also compiled verbatim by Cython
when a C toolchain is available (setup.py).  The compiled extension
shadows this source file at import time; `geolink.kernel` reports which
variant is active.

Approach: node every boundary segment of one geometry against the other
(exact-sign orientation predicates, float filter with a rational
fallback), then classify the noded sub-pieces of each boundary against
the other geometry's interior/boundary/exterior.  All nine matrix cells
follow from those piece classifications plus isolated contact points.
Polygon rings arrive orientation-normalized (interior locally to the
left of the directed boundary), which turns shared collinear boundary
pieces into an exact local test: same direction means the interiors
overlap across the shared piece, opposite direction means one interior
faces the other's exterior.
"""

from fractions import Fraction

try:
    import cython

    COMPILED = cython.compiled
except ImportError:  # interpreted, Cython not installed
    COMPILED = False

EMPTY = -1

# Stage-A orientation filter constant, (3 + 16*eps)*eps for float64.
_FILTER = 3.3306690738754716e-16


class KernelInconsistency(Exception):
    """Noding produced contradictory classifications; the input geometry
    cannot be resolved (typically a properly self-intersecting ring)."""


# ---------------------------------------------------------------------------
# exact-sign predicates
# ---------------------------------------------------------------------------


def _orient_exact(ax, ay, bx, by, cx, cy):
    det = (Fraction(ax) - Fraction(cx)) * (Fraction(by) - Fraction(cy)) - (
        Fraction(ay) - Fraction(cy)
    ) * (Fraction(bx) - Fraction(cx))
    if det > 0:
        return 1
    if det < 0:
        return -1
    return 0


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> int:
    """Sign of the cross product (b - a) x (c - a); exact."""
    detl: float = (ax - cx) * (by - cy)
    detr: float = (ay - cy) * (bx - cx)
    det: float = detl - detr
    detsum: float = abs(detl) + abs(detr)
    bound: float = _FILTER * detsum
    if det > bound:
        return 1
    if det < -bound:
        return -1
    if detsum == 0.0:
        # both products are exactly zero, hence det is exact
        return 0
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _orient_any(ax, ay, bx, by, cx, cy):
    """Orientation for possibly-rational probe points (always exact)."""
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _area2_exact(ax, ay, bx, by, cx, cy):
    """Twice the signed triangle area as an exact rational."""
    return (Fraction(bx) - Fraction(ax)) * (Fraction(cy) - Fraction(ay)) - (
        Fraction(by) - Fraction(ay)
    ) * (Fraction(cx) - Fraction(ax))


def _param_on_seg(px, py, x1, y1, x2, y2):
    """Exact parameter of a point known to lie on the segment's line."""
    dx = Fraction(x2) - Fraction(x1)
    dy = Fraction(y2) - Fraction(y1)
    if abs(dx) >= abs(dy):
        return (Fraction(px) - Fraction(x1)) / dx
    return (Fraction(py) - Fraction(y1)) / dy


# ---------------------------------------------------------------------------
# point location
# ---------------------------------------------------------------------------

LOC_IN = 0
LOC_ON = 1
LOC_OUT = 2


def _locate_float(px: float, py: float, rings: list) -> int:
    """Locate a float point against a ring set by exact parity counting.

    Holes need no special casing: a point inside a hole crosses both the
    shell and the hole ring, giving even parity (exterior).
    """
    inside = False
    for ring in rings:
        n: int = len(ring)
        ax: float = ring[0]
        ay: float = ring[1]
        i: int = 2
        while i < n:
            bx: float = ring[i]
            by: float = ring[i + 1]
            if (ay > py) != (by > py):
                o = _orient(ax, ay, bx, by, px, py)
                if o == 0:
                    return LOC_ON
                if (o > 0) == (by > ay):
                    inside = not inside
            else:
                # edge does not span the ray height; it may still carry p
                if (
                    (ay <= py <= by or by <= py <= ay)
                    and (ax <= px <= bx or bx <= px <= ax)
                    and _orient(ax, ay, bx, by, px, py) == 0
                ):
                    return LOC_ON
            ax = bx
            ay = by
            i += 2
    return LOC_IN if inside else LOC_OUT


def _locate_any(px, py, rings):
    """Ring-set location for rational probe points (exact arithmetic)."""
    inside = False
    for ring in rings:
        n = len(ring)
        ax = ring[0]
        ay = ring[1]
        i = 2
        while i < n:
            bx = ring[i]
            by = ring[i + 1]
            if (ay > py) != (by > py):
                o = _orient_any(ax, ay, bx, by, px, py)
                if o == 0:
                    return LOC_ON
                if (o > 0) == (by > ay):
                    inside = not inside
            else:
                if (
                    (ay <= py <= by or by <= py <= ay)
                    and (ax <= px <= bx or bx <= px <= ax)
                    and _orient_any(ax, ay, bx, by, px, py) == 0
                ):
                    return LOC_ON
            ax = bx
            ay = by
            i += 2
    return LOC_IN if inside else LOC_OUT


def _on_any_curve(px: float, py: float, curves: list) -> bool:
    """Exact test: does the point lie on any segment of the curve set?"""
    for curve in curves:
        n: int = len(curve)
        i: int = 0
        while i + 3 < n:
            ax: float = curve[i]
            ay: float = curve[i + 1]
            bx: float = curve[i + 2]
            by: float = curve[i + 3]
            if (
                (ax <= px <= bx or bx <= px <= ax)
                and (ay <= py <= by or by <= py <= ay)
                and _orient(ax, ay, bx, by, px, py) == 0
            ):
                return True
            i += 2
    return False


# ---------------------------------------------------------------------------
# noding state
# ---------------------------------------------------------------------------

# event indexes: both flags say whether the contact point is a line
# endpoint (boundary) on that side; polygons never set them
_EV_II = 0  # interior / interior
_EV_IB = 1  # interior of a / boundary endpoint of b
_EV_BI = 2
_EV_BB = 3


class _Side:
    """Noding records for one geometry's boundary curves."""

    def __init__(self, curves, is_line):
        self.curves = curves
        self.is_line = is_line
        if is_line:
            c = curves[0]
            n = len(c)
            self.open = not (c[0] == c[n - 2] and c[1] == c[n - 1])
            self.endpoints = (c[0], c[1], c[n - 2], c[n - 1])
        else:
            self.open = False
            self.endpoints = None
        self.nsegs = [len(c) // 2 - 1 for c in curves]
        self.cuts = {}  # (curve, seg) -> [param, ...] strictly interior
        self.covers = {}  # (curve, seg) -> [(lo, hi, same_dir), ...]
        self.touched = set()  # curve indexes with any recorded contact

    def endpoint_flag(self, ci, si, t):
        """True when the contact point at param t on segment si is a
        boundary endpoint of an open line.  Compares the geometric point
        (a non-simple line may revisit its endpoints mid-path)."""
        if not self.open:
            return False
        c = self.curves[ci]
        if t == 0:
            px = c[2 * si]
            py = c[2 * si + 1]
        elif t == 1:
            px = c[2 * si + 2]
            py = c[2 * si + 3]
        else:
            # strictly interior params are exact rationals
            x1 = Fraction(c[2 * si])
            y1 = Fraction(c[2 * si + 1])
            px = x1 + t * (Fraction(c[2 * si + 2]) - x1)
            py = y1 + t * (Fraction(c[2 * si + 3]) - y1)
        ex0, ey0, ex1, ey1 = self.endpoints
        return (px == ex0 and py == ey0) or (px == ex1 and py == ey1)


def _add_cut(side, ci, si, t):
    if 0 < t < 1:
        side.cuts.setdefault((ci, si), []).append(t)


def _register_point(sa, ca, ia, ta, sb, cb, ib, tb, ev):
    _add_cut(sa, ca, ia, ta)
    _add_cut(sb, cb, ib, tb)
    sa.touched.add(ca)
    sb.touched.add(cb)
    a_end = sa.endpoint_flag(ca, ia, ta)
    b_end = sb.endpoint_flag(cb, ib, tb)
    ev[(2 if a_end else 0) + (1 if b_end else 0)] = True


def _register_cover(side, ci, si, lo, hi, same):
    side.covers.setdefault((ci, si), []).append((lo, hi, same))
    side.touched.add(ci)


def _collect(sa, sb):
    """Node every segment of side a against every segment of side b.

    Returns the four event flags; cut/cover records accumulate on the
    sides themselves.
    """
    ev = [False, False, False, False]
    bprep = []
    for curve in sb.curves:
        n = len(curve)
        bminx = min(curve[0::2])
        bmaxx = max(curve[0::2])
        bminy = min(curve[1::2])
        bmaxy = max(curve[1::2])
        bprep.append((curve, n, bminx, bminy, bmaxx, bmaxy))

    for ca, acurve in enumerate(sa.curves):
        na: int = len(acurve)
        ia: int = 0
        seg_a: int = 0
        while ia + 3 < na:
            ax1: float = acurve[ia]
            ay1: float = acurve[ia + 1]
            ax2: float = acurve[ia + 2]
            ay2: float = acurve[ia + 3]
            aminx: float = ax1 if ax1 < ax2 else ax2
            amaxx: float = ax2 if ax1 < ax2 else ax1
            aminy: float = ay1 if ay1 < ay2 else ay2
            amaxy: float = ay2 if ay1 < ay2 else ay1
            for cb in range(len(bprep)):
                bcurve, nb, bminx, bminy, bmaxx, bmaxy = bprep[cb]
                if amaxx < bminx or bmaxx < aminx or amaxy < bminy or bmaxy < aminy:
                    continue
                ib: int = 0
                seg_b: int = 0
                while ib + 3 < nb:
                    bx1: float = bcurve[ib]
                    by1: float = bcurve[ib + 1]
                    bx2: float = bcurve[ib + 2]
                    by2: float = bcurve[ib + 3]
                    if not (
                        amaxx < (bx1 if bx1 < bx2 else bx2)
                        or (bx1 if bx1 > bx2 else bx2) < aminx
                        or amaxy < (by1 if by1 < by2 else by2)
                        or (by1 if by1 > by2 else by2) < aminy
                    ):
                        _segpair(
                            sa, ca, seg_a, ax1, ay1, ax2, ay2,
                            sb, cb, seg_b, bx1, by1, bx2, by2, ev,
                        )
                    ib += 2
                    seg_b += 1
            ia += 2
            seg_a += 1
    return ev


def _segpair(sa, ca, ia, ax1, ay1, ax2, ay2, sb, cb, ib, bx1, by1, bx2, by2, ev):
    o1 = _orient(ax1, ay1, ax2, ay2, bx1, by1)
    o2 = _orient(ax1, ay1, ax2, ay2, bx2, by2)
    if o1 == 0 and o2 == 0:
        _collinear_pair(sa, ca, ia, ax1, ay1, ax2, ay2, sb, cb, ib, bx1, by1, bx2, by2, ev)
        return
    if (o1 > 0 and o2 > 0) or (o1 < 0 and o2 < 0):
        return
    o3 = _orient(bx1, by1, bx2, by2, ax1, ay1)
    o4 = _orient(bx1, by1, bx2, by2, ax2, ay2)
    if (o3 > 0 and o4 > 0) or (o3 < 0 and o4 < 0):
        return
    if o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        # proper crossing; exact rational parameters
        aq1 = _area2_exact(ax1, ay1, ax2, ay2, bx1, by1)
        aq2 = _area2_exact(ax1, ay1, ax2, ay2, bx2, by2)
        ap1 = _area2_exact(bx1, by1, bx2, by2, ax1, ay1)
        ap2 = _area2_exact(bx1, by1, bx2, by2, ax2, ay2)
        ta = ap1 / (ap1 - ap2)
        tb = aq1 / (aq1 - aq2)
        _register_point(sa, ca, ia, ta, sb, cb, ib, tb, ev)
        return
    # touching contact at an endpoint of at least one segment
    if o1 == 0:
        ta = _param_on_seg(bx1, by1, ax1, ay1, ax2, ay2)
        if 0 <= ta <= 1:
            _register_point(sa, ca, ia, ta, sb, cb, ib, 0, ev)
    if o2 == 0:
        ta = _param_on_seg(bx2, by2, ax1, ay1, ax2, ay2)
        if 0 <= ta <= 1:
            _register_point(sa, ca, ia, ta, sb, cb, ib, 1, ev)
    if o3 == 0:
        tb = _param_on_seg(ax1, ay1, bx1, by1, bx2, by2)
        if 0 <= tb <= 1:
            _register_point(sa, ca, ia, 0, sb, cb, ib, tb, ev)
    if o4 == 0:
        tb = _param_on_seg(ax2, ay2, bx1, by1, bx2, by2)
        if 0 <= tb <= 1:
            _register_point(sa, ca, ia, 1, sb, cb, ib, tb, ev)


def _collinear_pair(sa, ca, ia, ax1, ay1, ax2, ay2, sb, cb, ib, bx1, by1, bx2, by2, ev):
    sa0 = _param_on_seg(bx1, by1, ax1, ay1, ax2, ay2)
    sa1 = _param_on_seg(bx2, by2, ax1, ay1, ax2, ay2)
    lo = sa0 if sa0 < sa1 else sa1
    hi = sa1 if sa0 < sa1 else sa0
    if hi < 0 or lo > 1:
        return
    clo = lo if lo > 0 else 0
    chi = hi if hi < 1 else 1
    if clo == chi:
        # collinear end-to-end touch at a single point
        if clo == sa0:
            tb = 0
        elif clo == sa1:
            tb = 1
        elif clo == 0:
            tb = _param_on_seg(ax1, ay1, bx1, by1, bx2, by2)
        else:
            tb = _param_on_seg(ax2, ay2, bx1, by1, bx2, by2)
        _register_point(sa, ca, ia, clo, sb, cb, ib, tb, ev)
        return
    same = sa1 > sa0
    sb0 = _param_on_seg(ax1, ay1, bx1, by1, bx2, by2)
    sb1 = _param_on_seg(ax2, ay2, bx1, by1, bx2, by2)
    blo_raw = sb0 if sb0 < sb1 else sb1
    bhi_raw = sb1 if sb0 < sb1 else sb0
    blo = blo_raw if blo_raw > 0 else 0
    bhi = bhi_raw if bhi_raw < 1 else 1
    _register_cover(sa, ca, ia, clo, chi, same)
    _register_cover(sb, cb, ib, blo, bhi, same)
    # interval ends are contact points too (this also nodes both sides)
    for t in (clo, chi):
        if t == sa0:
            tb = 0
        elif t == sa1:
            tb = 1
        elif t == 0:
            tb = sb0
        else:
            tb = sb1
        _register_point(sa, ca, ia, t, sb, cb, ib, tb, ev)


# ---------------------------------------------------------------------------
# piece classification
# ---------------------------------------------------------------------------


def _probe_piece(curve, si, t0, t1, rings):
    """Locate the midpoint of a noded piece inside a ring set.

    Returns True when interior, False when exterior.  Rational
    midpoints are first located through their rounded float image
    (exact predicates on the image point); only a boundary hit
    escalates to full rational arithmetic.  A confirmed boundary hit
    contradicts the noding, so it raises rather than guessing.
    """
    base = 2 * si
    ax = curve[base]
    ay = curve[base + 1]
    bx = curve[base + 2]
    by = curve[base + 3]
    if isinstance(t0, Fraction) or isinstance(t1, Fraction):
        tm = (Fraction(t0) + Fraction(t1)) / 2
        px = Fraction(ax) + tm * (Fraction(bx) - Fraction(ax))
        py = Fraction(ay) + tm * (Fraction(by) - Fraction(ay))
        loc = _locate_float(float(px), float(py), rings)
        if loc == LOC_ON:
            loc = _locate_any(px, py, rings)
    else:
        tmf: float = (t0 + t1) * 0.5
        pxf: float = ax + tmf * (bx - ax)
        pyf: float = ay + tmf * (by - ay)
        loc = _locate_float(pxf, pyf, rings)
    if loc == LOC_ON:
        raise KernelInconsistency("noded piece midpoint landed on the boundary")
    return loc == LOC_IN


def _seg_params(side, key):
    """Sorted unique piece boundaries for one segment: 0, 1, cuts, cover ends."""
    ts = {0, 1}
    cuts = side.cuts.get(key)
    if cuts:
        ts.update(cuts)
    covers = side.covers.get(key)
    if covers:
        for lo, hi, _ in covers:
            ts.add(lo)
            ts.add(hi)
    return sorted(ts)


def _classify_vs_polygon(side, other_rings):
    """Classify this side's boundary pieces against a polygon.

    Returns (has_interior, has_exterior, shared_same_dir, shared_opp_dir).
    """
    has_in = False
    has_out = False
    on_same = False
    on_opp = False
    for ci, curve in enumerate(side.curves):
        if has_in and has_out and on_same and on_opp:
            break
        if ci not in side.touched:
            # the whole curve avoids the other boundary: one probe decides
            if has_in and has_out:
                continue
            if _probe_piece(curve, 0, 0, 1, other_rings):
                has_in = True
            else:
                has_out = True
            continue
        for si in range(side.nsegs[ci]):
            key = (ci, si)
            covers = side.covers.get(key)
            if not covers:
                # no shared sub-segments here; probes only refine in/out
                if has_in and has_out:
                    continue
                if key not in side.cuts:
                    if _probe_piece(curve, si, 0, 1, other_rings):
                        has_in = True
                    else:
                        has_out = True
                    continue
            ts = _seg_params(side, key)
            for k in range(len(ts) - 1):
                t0 = ts[k]
                t1 = ts[k + 1]
                covered = False
                if covers:
                    for lo, hi, same in covers:
                        if lo <= t0 and t1 <= hi:
                            covered = True
                            if same:
                                on_same = True
                            else:
                                on_opp = True
                            break
                if not covered and not (has_in and has_out):
                    if _probe_piece(curve, si, t0, t1, other_rings):
                        has_in = True
                    else:
                        has_out = True
    return has_in, has_out, on_same, on_opp


def _classify_vs_line(side):
    """Classify this side's boundary pieces against a line: pieces are
    either collinear-shared (on) or off the line.  Returns (on, off)."""
    has_on = False
    has_off = False
    for ci in range(len(side.curves)):
        if has_on and has_off:
            break
        if ci not in side.touched:
            has_off = True
            continue
        for si in range(side.nsegs[ci]):
            if has_on and has_off:
                break
            key = (ci, si)
            covers = side.covers.get(key)
            if not covers:
                has_off = True
                continue
            ts = _seg_params(side, key)
            for k in range(len(ts) - 1):
                t0 = ts[k]
                t1 = ts[k + 1]
                covered = False
                for lo, hi, _ in covers:
                    if lo <= t0 and t1 <= hi:
                        covered = True
                        break
                if covered:
                    has_on = True
                else:
                    has_off = True
    return has_on, has_off


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------


def _line_endpoints(curve):
    n = len(curve)
    return (curve[0], curve[1]), (curve[n - 2], curve[n - 1])


def _relate_lines(a_curves, b_curves):
    sa = _Side(a_curves, True)
    sb = _Side(b_curves, True)
    ev = _collect(sa, sb)
    a_on, a_off = _classify_vs_line(sa)
    _, b_off = _classify_vs_line(sb)  # shared pieces are symmetric

    cells = [EMPTY] * 9
    if a_on:
        cells[0] = 1
    elif ev[_EV_II]:
        cells[0] = 0
    if ev[_EV_IB]:
        cells[1] = 0
    if a_off:
        cells[2] = 1
    if ev[_EV_BI]:
        cells[3] = 0
    if ev[_EV_BB]:
        cells[4] = 0
    if sa.open:
        for px, py in _line_endpoints(a_curves[0]):
            if not _on_any_curve(px, py, b_curves):
                cells[5] = 0
                break
    if b_off:
        cells[6] = 1
    if sb.open:
        for px, py in _line_endpoints(b_curves[0]):
            if not _on_any_curve(px, py, a_curves):
                cells[7] = 0
                break
    cells[8] = 2
    return tuple(cells)


def _relate_line_polygon(line_curves, rings):
    sa = _Side(line_curves, True)
    sb = _Side(rings, False)
    ev = _collect(sa, sb)
    a_in, a_out, on_same, on_opp = _classify_vs_polygon(sa, rings)
    a_on = on_same or on_opp
    _, b_off = _classify_vs_line(sb)

    cells = [EMPTY] * 9
    if a_in:
        cells[0] = 1
    if a_on:
        cells[1] = 1
    elif ev[_EV_II] or ev[_EV_IB]:
        cells[1] = 0
    if a_out:
        cells[2] = 1
    if sa.open:
        for px, py in _line_endpoints(line_curves[0]):
            loc = _locate_float(px, py, rings)
            if loc == LOC_IN:
                cells[3] = 0
            elif loc == LOC_ON:
                cells[4] = 0
            else:
                cells[5] = 0
    cells[6] = 2  # a 1-D line can never cover a polygon interior
    if b_off:
        cells[7] = 1
    cells[8] = 2
    return tuple(cells)


def _relate_polygons(a_rings, b_rings):
    sa = _Side(a_rings, False)
    sb = _Side(b_rings, False)
    ev = _collect(sa, sb)
    a_in, a_out, on_same, on_opp = _classify_vs_polygon(sa, b_rings)
    b_in, b_out, _, _ = _classify_vs_polygon(sb, a_rings)
    any_pt = ev[0] or ev[1] or ev[2] or ev[3]

    cells = [EMPTY] * 9
    if a_in or b_in or on_same:
        cells[0] = 2
    if b_in:
        cells[1] = 1
    if a_out or b_in or on_opp:
        cells[2] = 2
    if a_in:
        cells[3] = 1
    if on_same or on_opp:
        cells[4] = 1
    elif any_pt:
        cells[4] = 0
    if a_out:
        cells[5] = 1
    if b_out or a_in or on_opp:
        cells[6] = 2
    if b_out:
        cells[7] = 1
    cells[8] = 2
    return tuple(cells)


_TRANSPOSE_ORDER = (0, 3, 6, 1, 4, 7, 2, 5, 8)


def transpose_cells(cells):
    return tuple(cells[i] for i in _TRANSPOSE_ORDER)


def relate(a_dim, a_curves, b_dim, b_curves):
    """Compute the nine DE-9IM cells between two prepared geometries.

    a_curves/b_curves: list of flat [x0, y0, x1, y1, ...] coordinate
    lists; a single path for dim 1, orientation-normalized rings for
    dim 2.  Cell values are -1 (empty) or the intersection dimension.
    """
    if a_dim == 1 and b_dim == 1:
        return _relate_lines(a_curves, b_curves)
    if a_dim == 1 and b_dim == 2:
        return _relate_line_polygon(a_curves, b_curves)
    if a_dim == 2 and b_dim == 1:
        return transpose_cells(_relate_line_polygon(b_curves, a_curves))
    return _relate_polygons(a_curves, b_curves)


def rings_self_crossing(rings) -> bool:
    """True when any ring has a proper self-crossing (unresolvable);
    self-touches at isolated points are tolerated."""
    for ring in rings:
        nseg = len(ring) // 2 - 1
        for i in range(nseg):
            ax1 = ring[2 * i]
            ay1 = ring[2 * i + 1]
            ax2 = ring[2 * i + 2]
            ay2 = ring[2 * i + 3]
            for j in range(i + 2, nseg):
                if i == 0 and j == nseg - 1:
                    continue  # cyclically adjacent
                bx1 = ring[2 * j]
                by1 = ring[2 * j + 1]
                bx2 = ring[2 * j + 2]
                by2 = ring[2 * j + 3]
                o1 = _orient(ax1, ay1, ax2, ay2, bx1, by1)
                o2 = _orient(ax1, ay1, ax2, ay2, bx2, by2)
                if (o1 > 0 and o2 > 0) or (o1 < 0 and o2 < 0):
                    continue
                o3 = _orient(bx1, by1, bx2, by2, ax1, ay1)
                o4 = _orient(bx1, by1, bx2, by2, ax2, ay2)
                if (o3 > 0 and o4 > 0) or (o3 < 0 and o4 < 0):
                    continue
                if o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
                    return True
    return False
