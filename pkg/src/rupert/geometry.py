"""2D convex polygon primitives: hulls, halfplane forms, offset buffering.

Polygons are plain tuples of (x, y) vertex pairs in counterclockwise order.
Everything here is a pure function of its inputs, so the module is safe to
call from any number of threads or processes.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Tuple

Point2 = Tuple[float, float]
Halfplane = Tuple[Point2, float]  # outward normal n, offset b: <n, x> <= b

# Cross products below this magnitude are treated as collinear.
COLLINEAR_EPS = 1e-12
# Slack allowed when testing vertex/halfplane incidence.
CONTAIN_EPS = 1e-9


class DegenerateInput(ValueError):
    """Point set has no full-dimensional convex hull."""


class EmptyErosion(ValueError):
    """Inward offset left fewer than three usable vertices."""


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


class PlanarPolygon:
    """Strictly convex polygon with CCW vertices and derived halfplanes.

    Construct via convex_hull() unless the vertices are already known to be
    a strictly convex CCW cycle starting at the lexicographic minimum.
    """

    __slots__ = ("vertices", "halfplanes")

    def __init__(self, vertices: Sequence[Point2]):
        if len(vertices) < 3:
            raise DegenerateInput(f"polygon needs >= 3 vertices, got {len(vertices)}")
        self.vertices: Tuple[Point2, ...] = tuple((float(x), float(y)) for x, y in vertices)
        self.halfplanes: Tuple[Halfplane, ...] = tuple(self._derive_halfplanes())

    def _derive_halfplanes(self) -> Iterable[Halfplane]:
        # n_i = R_{pi/2}(q_i - q_{i+1}) is the outward normal of edge i,
        # b_i = <n_i, q_i>.  Normals are left unnormalized.
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            qi = verts[i]
            qj = verts[(i + 1) % n]
            dx = qi[0] - qj[0]
            dy = qi[1] - qj[1]
            nx, ny = -dy, dx
            yield ((nx, ny), nx * qi[0] + ny * qi[1])

    def contains(self, p: Point2, tol: float = CONTAIN_EPS) -> bool:
        """Closed containment test with per-halfplane slack scaled to |n|."""
        for (nx, ny), b in self.halfplanes:
            scale = math.hypot(nx, ny)
            if nx * p[0] + ny * p[1] > b + tol * max(1.0, scale):
                return False
        return True

    def signed_area(self) -> float:
        verts = self.vertices
        acc = 0.0
        for i in range(len(verts)):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % len(verts)]
            acc += x0 * y1 - x1 * y0
        return 0.5 * acc

    def bounds(self) -> Tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def diameter(self) -> float:
        verts = self.vertices
        best = 0.0
        for i in range(len(verts)):
            xi, yi = verts[i]
            for j in range(i + 1, len(verts)):
                d = math.hypot(verts[j][0] - xi, verts[j][1] - yi)
                if d > best:
                    best = d
        return best

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlanarPolygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"PlanarPolygon({list(self.vertices)!r})"


def convex_hull(points: Iterable[Point2]) -> PlanarPolygon:
    """Strictly convex CCW hull via monotone chain.

    Collinear points (cross product within COLLINEAR_EPS) are dropped; ties
    in the sweep are broken lexicographically so the output is deterministic
    and starts at the lexicographically smallest vertex.
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) < 3:
        raise DegenerateInput("need >= 3 distinct points")

    def half(seq: Sequence[Point2]) -> list:
        out: list = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= COLLINEAR_EPS:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("hull is not full-dimensional")
    return PlanarPolygon(hull)


def halfplanes(poly: PlanarPolygon) -> Tuple[Halfplane, ...]:
    """Outward halfplane form (n_i, b_i) of a polygon: x in poly iff <n_i, x> <= b_i."""
    return poly.halfplanes


def clip_halfplane(points: Sequence[Point2], nx: float, ny: float, b: float) -> list:
    """Sutherland-Hodgman clip of a convex CCW polygon against <n, x> <= b."""
    out: list = []
    n = len(points)
    for i in range(n):
        cur = points[i]
        nxt = points[(i + 1) % n]
        d_cur = nx * cur[0] + ny * cur[1] - b
        d_nxt = nx * nxt[0] + ny * nxt[1] - b
        if d_cur <= 0.0:
            out.append(cur)
            if d_nxt > 0.0:
                t = d_cur / (d_cur - d_nxt)
                out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
        elif d_nxt <= 0.0:
            t = d_cur / (d_cur - d_nxt)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def buffer(poly: PlanarPolygon, r: float) -> PlanarPolygon:
    """Offset a convex polygon by a signed distance r using halfplane shifts.

    r > 0 shifts every edge outward by r along its unit normal and intersects
    the shifted halfplanes: the result contains the Minkowski sum of poly with
    the radius-r disk, hence contains every polygon whose vertices lie within
    r of poly's.  r < 0 erodes: the intersection of inward-shifted halfplanes,
    which is contained in every polygon whose vertices lie within |r| of
    poly's.  r == 0 returns poly unchanged.

    Raises EmptyErosion when an inward offset leaves an empty or degenerate
    region; callers must treat that as "this perturbation radius is too large
    to certify anything".
    """
    if not math.isfinite(r):
        raise ValueError("offset distance must be finite")
    if r == 0.0:
        return poly

    shifted = []
    for (nx, ny), b in poly.halfplanes:
        norm = math.hypot(nx, ny)
        shifted.append((nx / norm, ny / norm, b / norm + r))

    if r > 0.0:
        xmin, ymin, xmax, ymax = poly.bounds()
        pad = r + 1.0
        pts: list = [
            (xmin - pad, ymin - pad),
            (xmax + pad, ymin - pad),
            (xmax + pad, ymax + pad),
            (xmin - pad, ymax + pad),
        ]
    else:
        pts = list(poly.vertices)

    for nx, ny, b in shifted:
        pts = clip_halfplane(pts, nx, ny, b)
        if len(pts) < 3:
            raise EmptyErosion(f"offset by {r} leaves no polygon")
    try:
        return convex_hull(pts)
    except DegenerateInput as exc:
        raise EmptyErosion(f"offset by {r} leaves a degenerate polygon") from exc
