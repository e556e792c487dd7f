"""Single-point certification: rule out passages in a neighborhood, or find one.

check() projects the solid at the queried orientation pair and first asks
the exact question: does either shadow fit strictly inside the other?  If
yes, the point itself is a passage (INVALID).  Otherwise it tries to rule
out a whole neighborhood: every angle perturbation of size delta moves a
shadow vertex by at most sqrt(5)*delta (resp. sqrt(2)*delta for the
unrotated shadow) times the vertex norm, so eroding the inserted shadow by
that much and dilating the containing shadow covers every perturbed pair at
once.  If neither buffered insertion fits at scale 1, no perturbation
within delta admits a passage in either direction.  delta starts large and
decays geometrically until certification succeeds or delta falls below the
configured threshold.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from typing import Optional, Tuple

from .geometry import EmptyErosion, PlanarPolygon, buffer
from .lp import FIT_EPS, NumericFailure, fit_scale
from .polyhedron import ParamPoint, Polyhedron, shadow

RULED_OUT = "ruled_out"
EXHAUSTED = "exhausted"
INVALID = "invalid"

# Buffer radius per unit delta: operator-norm bound of the shadow-map
# difference for the rotated and unrotated side respectively.
_RP_COEF = math.sqrt(5.0)
_RQ_COEF = math.sqrt(2.0)

# Radii cover only the projection-matrix difference (unit vertex norms).
BUFFER_MATRIX = "matrix"
# Radii scaled by the largest vertex norm: covers true vertex displacement.
BUFFER_VERTEX = "vertex"

BUFFER_MODES = (BUFFER_MATRIX, BUFFER_VERTEX)


@dataclass(frozen=True)
class CheckConfig:
    delta_init: float = 0.25
    decay: float = 0.8
    threshold_b: float = 1e-3
    buffer_mode: str = BUFFER_VERTEX
    certify_ruled_out: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.decay < 1.0):
            raise ValueError("decay must be in (0, 1)")
        if self.threshold_b <= 0.0:
            raise ValueError("threshold_b must be positive")
        if self.delta_init <= 0.0:
            raise ValueError("delta_init must be positive")
        if self.buffer_mode not in BUFFER_MODES:
            raise ValueError(f"buffer_mode must be one of {BUFFER_MODES}")


@dataclass(frozen=True)
class CertOutcome:
    """Result of check(): the point is a passage (invalid), a neighborhood
    is passage-free (ruled_out, with its certified radius), or neither
    could be established before delta hit the threshold (exhausted)."""

    kind: str
    witness_scales: Tuple[float, float]
    epsilon: Optional[float] = None
    delta_success: Optional[float] = None
    passage_scale: Optional[float] = None
    passage_translation: Optional[Tuple[float, float]] = None
    passage_direction: Optional[str] = None


def point_seed(point: ParamPoint) -> int:
    """Deterministic solver seed derived from the coordinates."""
    return zlib.crc32(struct.pack("<5d", *point.as_tuple()))


def _fits_at_unit_scale(inner: PlanarPolygon, outer: PlanarPolygon) -> bool:
    """Cheap sufficient test that some translate of inner lies in outer.

    Tries the centroid-aligning translation and verifies every vertex with
    slack; a True answer is a genuine witness that the fit scale is >= 1, a
    False answer decides nothing.
    """
    ix = sum(v[0] for v in inner.vertices) / len(inner.vertices)
    iy = sum(v[1] for v in inner.vertices) / len(inner.vertices)
    ox = sum(v[0] for v in outer.vertices) / len(outer.vertices)
    oy = sum(v[1] for v in outer.vertices) / len(outer.vertices)
    tx, ty = ox - ix, oy - iy
    for vx, vy in inner.vertices:
        px, py = vx + tx, vy + ty
        for (nx, ny), b in outer.halfplanes:
            if nx * px + ny * py > b - 1e-12:
                return False
    return True


def check(point: ParamPoint, poly: Polyhedron, cfg: CheckConfig) -> CertOutcome:
    """Certify a neighborhood of an orientation pair, or detect a passage.

    Returns INVALID only from the exact fits at the queried point, never
    from buffered ones.  A RULED_OUT outcome at delta_success = d certifies
    (via the buffered fits) that no point whose five angles each differ by
    at most d from the query admits a passage in either direction; the
    reported epsilon reproduces the geometric-decay bookkeeping and equals
    2 * decay * delta_success.
    """
    seed = point_seed(point)
    P = shadow(poly, point.alpha, point.theta, point.phi)
    Q = shadow(poly, 0.0, point.theta_p, point.phi_p)

    res_pq = fit_scale(P, Q, seed=seed)
    res_qp = fit_scale(Q, P, seed=seed + 1)
    scales = (res_pq.s_star, res_qp.s_star)
    if max(scales) > 1.0 + FIT_EPS:
        if res_pq.s_star >= res_qp.s_star:
            best, direction = res_pq, "P_into_Q"
        else:
            best, direction = res_qp, "Q_into_P"
        return CertOutcome(
            kind=INVALID,
            witness_scales=scales,
            passage_scale=best.s_star,
            passage_translation=best.t_star,
            passage_direction=direction,
        )

    factor = poly.max_vertex_norm() if cfg.buffer_mode == BUFFER_VERTEX else 1.0
    rp = _RP_COEF * factor
    rq = _RQ_COEF * factor

    delta = cfg.delta_init
    iteration = 0
    while delta > cfg.threshold_b:
        d_used = delta
        delta *= cfg.decay
        iteration += 1
        try:
            p_minus = buffer(P, -rp * d_used)
            q_plus = buffer(Q, rq * d_used)
        except EmptyErosion:
            continue
        # One buffered fit per containment direction, each with the inserted
        # shadow eroded and the containing shadow dilated.  A scale-1 witness
        # for either direction already defeats this delta, skipping the LP
        # and often the second pair of buffers.
        if _fits_at_unit_scale(p_minus, q_plus):
            continue
        try:
            s_minus = fit_scale(p_minus, q_plus, seed=seed + 2 * iteration).s_star
        except NumericFailure:
            continue
        if s_minus >= 1.0 - FIT_EPS:
            continue
        try:
            p_plus = buffer(P, rp * d_used)
            q_minus = buffer(Q, -rq * d_used)
        except EmptyErosion:
            continue
        if _fits_at_unit_scale(q_minus, p_plus):
            continue
        try:
            s_plus = fit_scale(q_minus, p_plus, seed=seed + 2 * iteration + 1).s_star
        except NumericFailure:
            continue
        if max(s_minus, s_plus) < 1.0 - FIT_EPS:
            if cfg.certify_ruled_out:
                r1 = fit_scale(p_minus, q_plus, seed=seed + 2 * iteration, certify=True)
                r2 = fit_scale(q_minus, p_plus, seed=seed + 2 * iteration + 1, certify=True)
                if not (
                    r1.certified
                    and r2.certified
                    and max(r1.s_star, r2.s_star) < 1.0 - FIT_EPS
                ):
                    continue
            return CertOutcome(
                kind=RULED_OUT,
                witness_scales=scales,
                epsilon=2.0 * delta,
                delta_success=d_used,
            )
    return CertOutcome(kind=EXHAUSTED, witness_scales=scales)
