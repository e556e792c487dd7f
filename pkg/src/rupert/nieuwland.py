"""Passage search by direct optimization over orientation pairs.

The objective at a parameter point is the larger of the two directed fit
scales between the shadows; values above 1 are passages.  A derivative-free
multistart strategy keeps the search reproducible: restart k draws its
start uniformly from LAMBDA with a stream seeded by (seed, k), then runs a
coordinatewise pattern search with geometrically shrinking steps.  Budgets
count objective evaluations, so doubling the budget extends the same
evaluation stream and the running maximum can only improve.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from .certify import point_seed
from .lp import FIT_EPS, fit_scale
from .polyhedron import LAMBDA_RANGES, ParamPoint, Polyhedron, shadow

_INITIAL_STEP = math.pi / 16.0
_FINAL_STEP = 1e-7


@dataclass(frozen=True)
class PassageCandidate:
    point: ParamPoint
    scale: float
    translation: Tuple[float, float]
    direction: str  # which shadow is inserted: "P_into_Q" or "Q_into_P"


def _objective(poly: Polyhedron, point: ParamPoint) -> Tuple[float, Tuple[float, float], str]:
    seed = point_seed(point)
    P = shadow(poly, point.alpha, point.theta, point.phi)
    Q = shadow(poly, 0.0, point.theta_p, point.phi_p)
    res_pq = fit_scale(P, Q, seed=seed)
    res_qp = fit_scale(Q, P, seed=seed + 1)
    if res_pq.s_star >= res_qp.s_star:
        return res_pq.s_star, res_pq.t_star, "P_into_Q"
    return res_qp.s_star, res_qp.t_star, "Q_into_P"


def verify_candidate(poly: Polyhedron, cand: PassageCandidate, margin: float = FIT_EPS) -> bool:
    """Replay a candidate through direct vertex-in-halfplane checks.

    Scales the inserted shadow by (scale - margin), applies the stored
    translation, and requires every vertex strictly inside the containing
    shadow.  Independent of the LP solver.
    """
    p = cand.point
    P = shadow(poly, p.alpha, p.theta, p.phi)
    Q = shadow(poly, 0.0, p.theta_p, p.phi_p)
    inner, outer = (P, Q) if cand.direction == "P_into_Q" else (Q, P)
    s = cand.scale - margin
    tx, ty = cand.translation
    for vx, vy in inner.vertices:
        px, py = s * vx + tx, s * vy + ty
        for (nx, ny), b in outer.halfplanes:
            if nx * px + ny * py >= b:
                return False
    return True


def find_passage(poly: Polyhedron, budget: int, seed: int = 0) -> PassageCandidate:
    """Best passage candidate found within the evaluation budget.

    Deterministic in (budget, seed); the best scale is a running maximum
    over an evaluation stream that longer budgets extend.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")

    evals = 0
    best: Optional[PassageCandidate] = None

    def evaluate(point: ParamPoint) -> float:
        nonlocal evals, best
        scale, translation, direction = _objective(poly, point)
        evals += 1
        if best is None or scale > best.scale:
            best = PassageCandidate(point=point, scale=scale, translation=translation, direction=direction)
        return scale

    restart = 0
    while evals < budget:
        rng = random.Random((seed << 32) ^ restart)
        restart += 1
        x = [rng.uniform(0.0, r) for r in LAMBDA_RANGES]
        fx = evaluate(ParamPoint(*x))
        step = _INITIAL_STEP
        while step >= _FINAL_STEP and evals < budget:
            improved = False
            for k in range(5):
                for sign in (1.0, -1.0):
                    if evals >= budget:
                        break
                    y = list(x)
                    y[k] += sign * step
                    fy = evaluate(ParamPoint(*y))
                    if fy > fx:
                        x, fx = y, fy
                        improved = True
            if not improved:
                step *= 0.5
    return best


def sweep_values(a_from: float, a_to: float, step: float) -> List[float]:
    values = []
    k = 0
    while True:
        a = a_from + k * step
        if a > a_to + 1e-12:
            break
        values.append(min(a, a_to))
        k += 1
    return values


def nieuwland_sweep(
    a_from: float,
    a_to: float,
    step: float,
    budget: int,
    seed: int = 0,
    progress: Optional[Callable[[float, PassageCandidate], None]] = None,
) -> List[Tuple[float, PassageCandidate]]:
    """find_passage over a grid of stellation parameters."""
    from .polyhedron import stellated_tetrahedron

    if not (0.0 < a_from <= a_to < 1.0):
        raise ValueError("stellation range must satisfy 0 < a_from <= a_to < 1")
    if step <= 0.0:
        raise ValueError("step must be positive")
    out = []
    for a in sweep_values(a_from, a_to, step):
        cand = find_passage(stellated_tetrahedron(a), budget, seed)
        out.append((a, cand))
        if progress is not None:
            progress(a, cand)
    return out


def sweep_csv_lines(rows: List[Tuple[float, PassageCandidate]]) -> List[str]:
    lines = ["a,best_scale,alpha,theta,phi,theta_p,phi_p"]
    for a, cand in rows:
        p = cand.point
        vals = (a, cand.scale, p.alpha, p.theta, p.phi, p.theta_p, p.phi_p)
        lines.append(",".join(f"{v:.17g}" for v in vals))
    return lines
