"""Polyhedra, their planar shadows, and the orientation parameter space.

An orientation pair is encoded by five angles (alpha, theta, phi, theta_p,
phi_p): the first shadow is R_alpha . M(theta, phi) applied to the vertex
set, the second is M(theta_p, phi_p) with no planar rotation.  The reduced
parameter space is

    LAMBDA = [0,2pi] x [0,pi/2] x [0,pi] x [0,pi/2] x [0,2pi]

in that axis order, with total volume pi^5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull as _SciHull

from .geometry import PlanarPolygon, convex_hull

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# Interval lengths of LAMBDA per axis (alpha, theta, phi, theta_p, phi_p).
LAMBDA_RANGES: Tuple[float, ...] = (TWO_PI, HALF_PI, math.pi, HALF_PI, TWO_PI)
LAMBDA_VOLUME = math.pi**5


class InvalidParameter(ValueError):
    """Shape parameter outside its allowed range."""


@dataclass(frozen=True)
class ParamPoint:
    """Five angles (radians) encoding an orientation pair."""

    alpha: float
    theta: float
    phi: float
    theta_p: float
    phi_p: float

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.alpha, self.theta, self.phi, self.theta_p, self.phi_p)


class Polyhedron:
    """Finite vertex set in convex position in R^3."""

    __slots__ = ("vertices", "label")

    def __init__(self, vertices: Sequence[Sequence[float]], label: str = "custom", validate: bool = True):
        self.vertices: Tuple[Tuple[float, float, float], ...] = tuple(
            (float(x), float(y), float(z)) for x, y, z in vertices
        )
        self.label = label
        if validate:
            self._validate()

    def _validate(self) -> None:
        if len(self.vertices) < 4:
            raise ValueError("a polyhedron needs at least 4 vertices")
        pts = np.asarray(self.vertices)
        try:
            hull = _SciHull(pts)
        except Exception as exc:
            raise ValueError(f"vertices are not full-dimensional: {exc}") from None
        if hull.volume <= 0:
            raise ValueError("vertices are coplanar")
        on_hull = set(hull.vertices.tolist())
        missing = [i for i in range(len(self.vertices)) if i not in on_hull]
        if missing:
            raise ValueError(f"vertices not in convex position (interior indices {missing})")

    def max_vertex_norm(self) -> float:
        return max(math.sqrt(x * x + y * y + z * z) for x, y, z in self.vertices)

    def vertex_hash(self) -> str:
        import hashlib

        payload = ",".join(f"{c!r}" for v in self.vertices for c in v)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"Polyhedron({self.label!r}, {len(self.vertices)} vertices)"


def stellated_tetrahedron(a: float) -> Polyhedron:
    """Regular tetrahedron with an apex over each face at -a times the
    opposite vertex.

    Only a in (0, 1) is accepted; convex position additionally requires
    a > 1/3 (below that the apexes sink inside the tetrahedron), which the
    constructor's validation enforces.
    """
    if not (0.0 < a < 1.0):
        raise InvalidParameter(f"stellation parameter must be in (0, 1), got {a}")
    p = [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
    q = [(-a * x, -a * y, -a * z) for x, y, z in p]
    return Polyhedron(p + q, label=f"stellated:{a!r}")


def cube() -> Polyhedron:
    verts = [(float(sx), float(sy), float(sz)) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    return Polyhedron(verts, label="cube")


def load_polyhedron(path: str, label: str | None = None) -> Polyhedron:
    """Read one vertex per line, three whitespace-separated decimals;
    lines starting with '#' are ignored."""
    verts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 coordinates, got {len(parts)}")
            verts.append(tuple(float(p) for p in parts))
    return Polyhedron(verts, label=label or f"file:{path}")


def projection_matrix(theta: float, phi: float) -> np.ndarray:
    """The 2x3 matrix taking a rotated solid to its planar shadow."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return np.array([[-st, ct, 0.0], [-ct * cp, -st * cp, sp]])


def _shadow_rows(alpha: float, theta: float, phi: float) -> Tuple[Tuple[float, float, float], Tuple[float, float, float]]:
    """Rows of R_alpha . M(theta, phi) as plain tuples (hot path)."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    m00, m01, m02 = -st, ct, 0.0
    m10, m11, m12 = -ct * cp, -st * cp, sp
    if alpha == 0.0:
        return (m00, m01, m02), (m10, m11, m12)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return (
        (ca * m00 - sa * m10, ca * m01 - sa * m11, ca * m02 - sa * m12),
        (sa * m00 + ca * m10, sa * m01 + ca * m11, sa * m02 + ca * m12),
    )


def shadow(poly: Polyhedron, alpha: float, theta: float, phi: float) -> PlanarPolygon:
    """Convex hull of the projected vertex images under R_alpha . M(theta, phi)."""
    (r0x, r0y, r0z), (r1x, r1y, r1z) = _shadow_rows(alpha, theta, phi)
    pts = [
        (r0x * x + r0y * y + r0z * z, r1x * x + r1y * y + r1z * z)
        for x, y, z in poly.vertices
    ]
    return convex_hull(pts)


def _wrap(x: float) -> float:
    if 0.0 <= x <= TWO_PI:
        return x
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return r


def canonicalize(p: ParamPoint) -> ParamPoint:
    """Map a parameter point into LAMBDA without changing its fit relations.

    Valid for vertex sets invariant under (x, y, z) -> (y, -x, -z), which
    includes every stellated tetrahedron and the cube.  Under that symmetry
    a quarter turn in either theta flips the corresponding shadow through
    the origin, which a half turn absorbed into alpha undoes; when phi
    exceeds pi, one reflection applied to both shadows at once moves phi
    into [0, pi] while shifting phi_p by pi and negating alpha.  Points
    already inside LAMBDA are fixed.
    """
    alpha = _wrap(p.alpha)
    theta = _wrap(p.theta)
    phi = _wrap(p.phi)
    theta_p = _wrap(p.theta_p)
    phi_p = _wrap(p.phi_p)

    if theta > HALF_PI:
        k = math.floor(theta / HALF_PI)
        theta -= k * HALF_PI
        alpha += k * math.pi
    if theta_p > HALF_PI:
        k = math.floor(theta_p / HALF_PI)
        theta_p -= k * HALF_PI
        alpha -= k * math.pi
    if phi > math.pi:
        phi -= math.pi
        phi_p = _wrap(phi_p + math.pi)
        alpha = -alpha
    return ParamPoint(_wrap(alpha), theta, phi, theta_p, phi_p)


def in_lambda(p: ParamPoint) -> bool:
    vals = p.as_tuple()
    return all(0.0 <= v <= r for v, r in zip(vals, LAMBDA_RANGES))
