import math
import random

import pytest

from conftest import random_convex_polygon
from rupert.geometry import (
    DegenerateInput,
    EmptyErosion,
    PlanarPolygon,
    buffer,
    convex_hull,
    halfplanes,
)


def square(h: float = 1.0) -> PlanarPolygon:
    return convex_hull([(-h, -h), (h, -h), (h, h), (-h, h)])


class TestConvexHull:
    def test_triangle_is_its_own_hull(self):
        hull = convex_hull([(0, 0), (1, 0), (0, 1)])
        assert set(hull.vertices) == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
        assert hull.signed_area() > 0  # CCW

    def test_interior_point_dropped(self):
        hull = convex_hull([(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)])
        assert set(hull.vertices) == {(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)}

    def test_projected_cube_is_square(self):
        # Dropping a cube's vertices through (x, y, z) -> (y, -x): each of the
        # four images (+-1, -+1) is hit by exactly two cube vertices.
        cube = [(sx, sy, sz) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
        images = [(y, -x) for x, y, z in cube]
        counts = {}
        for img in images:
            counts[img] = counts.get(img, 0) + 1
        assert all(c == 2 for c in counts.values())
        hull = convex_hull(images)
        assert len(hull.vertices) == 4
        assert set(hull.vertices) == {(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)}

    def test_collinear_input_rejected(self):
        with pytest.raises(DegenerateInput):
            convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_too_few_points_rejected(self):
        with pytest.raises(DegenerateInput):
            convex_hull([(0, 0), (1, 0)])

    def test_idempotent(self):
        rng = random.Random(7)
        for _ in range(50):
            poly = random_convex_polygon(rng)
            again = convex_hull(poly.vertices)
            assert again.vertices == poly.vertices


class TestHalfplanes:
    def test_unit_square_offsets(self):
        sq = square(1.0)
        planes = halfplanes(sq)
        assert len(planes) == 4
        for (nx, ny), b in planes:
            # Edges have length 2, so unnormalized normals have length 2 and
            # every offset equals 2.
            assert math.hypot(nx, ny) == pytest.approx(2.0, abs=1e-12)
            assert b == pytest.approx(2.0, abs=1e-12)
            assert (nx == 0.0) != (ny == 0.0)

    def test_triangle_interior_point_strict(self):
        tri = convex_hull([(0, 0), (1, 0), (0, 1)])
        for (nx, ny), b in tri.halfplanes:
            assert nx * 0.25 + ny * 0.25 < b

    def test_vertices_achieve_their_own_equality(self):
        rng = random.Random(3)
        for _ in range(20):
            poly = random_convex_polygon(rng)
            verts = poly.vertices
            n = len(verts)
            for i, ((nx, ny), b) in enumerate(poly.halfplanes):
                qi = verts[i]
                assert nx * qi[0] + ny * qi[1] == pytest.approx(b, abs=1e-12)

    def test_all_vertices_satisfy_all_halfplanes(self):
        rng = random.Random(4)
        for _ in range(50):
            poly = random_convex_polygon(rng)
            for v in poly.vertices:
                assert poly.contains(v, tol=1e-9)


class TestBuffer:
    def test_outward_square(self):
        out = buffer(square(1.0), 0.5)
        assert set(out.vertices) == {(-1.5, -1.5), (1.5, -1.5), (1.5, 1.5), (-1.5, 1.5)}

    def test_inward_square(self):
        out = buffer(square(1.0), -0.5)
        assert set(out.vertices) == {(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)}

    def test_erosion_past_inradius(self):
        with pytest.raises(EmptyErosion):
            buffer(square(1.0), -1.5)

    def test_zero_is_identity(self):
        sq = square(1.0)
        assert buffer(sq, 0.0) is sq

    def test_containment_chain(self):
        rng = random.Random(11)
        for _ in range(30):
            poly = random_convex_polygon(rng)
            r1 = rng.uniform(0.01, 0.1)
            r2 = r1 + rng.uniform(0.01, 0.1)
            try:
                inner2 = buffer(poly, -r2)
                inner1 = buffer(poly, -r1)
            except EmptyErosion:
                continue
            outer1 = buffer(poly, r1)
            outer2 = buffer(poly, r2)
            for v in inner2.vertices:
                assert inner1.contains(v)
            for v in inner1.vertices:
                assert poly.contains(v)
            for v in poly.vertices:
                assert outer1.contains(v)
            for v in outer1.vertices:
                assert outer2.contains(v)

    def test_perturbation_soundness(self):
        # Eroded polygons sit inside every small perturbation; dilated
        # polygons contain every small perturbation.
        rng = random.Random(2024)
        checked = 0
        while checked < 500:
            poly = random_convex_polygon(rng)
            r = rng.uniform(0.02, 0.15)
            try:
                inner = buffer(poly, -r)
            except EmptyErosion:
                continue
            outer = buffer(poly, r)
            for _ in range(50):
                perturbed = []
                for x, y in poly.vertices:
                    ang = rng.uniform(0, 2 * math.pi)
                    rad = r * math.sqrt(rng.uniform(0, 1.0)) * 0.999
                    perturbed.append((x + rad * math.cos(ang), y + rad * math.sin(ang)))
                try:
                    tilde = convex_hull(perturbed)
                except DegenerateInput:
                    continue
                for v in inner.vertices:
                    assert tilde.contains(v)
                for v in perturbed:
                    assert outer.contains(v)
            checked += 1
