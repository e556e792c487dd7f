"""Shared helpers for the test suite."""

import math
import random

from rupert.geometry import PlanarPolygon, convex_hull, DegenerateInput


def random_convex_polygon(rng: random.Random, max_pts: int = 10, radius: float = 2.0) -> PlanarPolygon:
    """Hull of a few random points in a disk; retries degenerate draws."""
    while True:
        k = rng.randint(3, max_pts)
        pts = []
        for _ in range(k):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            rad = radius * math.sqrt(rng.uniform(0.1, 1.0))
            pts.append((rad * math.cos(ang), rad * math.sin(ang)))
        try:
            return convex_hull(pts)
        except DegenerateInput:
            continue
