"""The fit-scale linear program.

fit_scale(P, Q) finds the largest s such that some translate of s*P lies in
Q, by maximizing s over the constraints <n_j, s*p_i + t> <= b_j for every
vertex p_i of P and halfplane (n_j, b_j) of Q.  The program has only three
variables (s, t_x, t_y), so it is solved with Seidel's randomized
incremental method, which runs in expected linear time in the constraint
count.  Optimality can be certified by exhibiting nonnegative multipliers
over the active constraints, recomputed in exact rational arithmetic.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from .geometry import PlanarPolygon, Point2

# Dead band around scale 1: containment verdicts inside it are inconclusive.
FIT_EPS = 1e-9

# Feasibility slack required of a returned solution.
_FEAS_EPS = 1e-9
# Constraint-violation threshold inside the solver.
_VIOL_EPS = 1e-12
# Coefficients below this are treated as zero.
_TINY = 1e-14
# Tiny objective tilt so every subproblem has a unique optimum.
_TIE_X = 1.0e-13
_TIE_Y = 0.6180339887e-13


class NumericFailure(RuntimeError):
    """Solver could not reach the required feasibility tolerance."""


@dataclass(frozen=True)
class FitProgram:
    """Constraint rows over (s, t_x, t_y); the objective is always max s."""

    rows: Tuple[Tuple[float, float, float], ...]
    rhs: Tuple[float, ...]


@dataclass(frozen=True)
class FitResult:
    s_star: float
    t_star: Point2
    certified: bool = False
    multipliers: Optional[Tuple[Tuple[int, float], ...]] = None


def build_fit_program(P: PlanarPolygon, Q: PlanarPolygon) -> FitProgram:
    """One constraint per (vertex of P, halfplane of Q) pair, unit normals."""
    rows: List[Tuple[float, float, float]] = []
    rhs: List[float] = []
    for (nx, ny), b in Q.halfplanes:
        norm = math.hypot(nx, ny)
        ux, uy, ub = nx / norm, ny / norm, b / norm
        for px, py in P.vertices:
            rows.append((ux * px + uy * py, ux, uy))
            rhs.append(ub)
    return FitProgram(tuple(rows), tuple(rhs))


# ---------------------------------------------------------------------------
# Seidel's algorithm, fixed dimension 3.


def _lp1(c: float, cons: Sequence[Tuple[float, float]], lo: float, hi: float) -> float:
    for a, b in cons:
        if a > _TINY:
            ub = b / a
            if ub < hi:
                hi = ub
        elif a < -_TINY:
            lb = b / a
            if lb > lo:
                lo = lb
        elif b < -_VIOL_EPS:
            raise NumericFailure("1D subproblem infeasible")
    if lo > hi + _VIOL_EPS:
        raise NumericFailure("1D interval empty")
    if lo > hi:
        hi = lo
    if c > _TINY:
        return hi
    if c < -_TINY:
        return lo
    return min(max(lo, 0.0), hi)


def _lp2(cx: float, cy: float, cons: List[Tuple[float, float, float]], bound: float) -> Tuple[float, float]:
    x = bound if cx > _TINY else (-bound if cx < -_TINY else 0.0)
    y = bound if cy > _TINY else (-bound if cy < -_TINY else 0.0)
    for i, (ax, ay, b) in enumerate(cons):
        if ax * x + ay * y <= b + _VIOL_EPS:
            continue
        # Re-optimize on the line ax*x + ay*y = b.
        norm2 = ax * ax + ay * ay
        if norm2 <= _TINY * _TINY:
            raise NumericFailure("degenerate 2D constraint violated")
        q0x, q0y = ax * b / norm2, ay * b / norm2
        inorm = 1.0 / math.sqrt(norm2)
        dx, dy = -ay * inorm, ax * inorm
        line_cons = []
        for jx, jy, jb in cons[:i]:
            line_cons.append((jx * dx + jy * dy, jb - (jx * q0x + jy * q0y)))
        t = _lp1(cx * dx + cy * dy, line_cons, -4.0 * bound, 4.0 * bound)
        x, y = q0x + t * dx, q0y + t * dy
    return x, y


def _lp3(
    c: Tuple[float, float, float],
    cons: List[Tuple[float, float, float, float]],
    start: Tuple[float, float, float],
    bound: float,
) -> Tuple[float, float, float]:
    x = list(start)
    for i, (a0, a1, a2, b) in enumerate(cons):
        if a0 * x[0] + a1 * x[1] + a2 * x[2] <= b + _VIOL_EPS:
            continue
        # Re-optimize on the plane a . x = b.
        norm = math.sqrt(a0 * a0 + a1 * a1 + a2 * a2)
        if norm <= _TINY:
            raise NumericFailure("degenerate 3D constraint violated")
        m = (a0 / norm, a1 / norm, a2 / norm)
        p0 = (m[0] * b / norm, m[1] * b / norm, m[2] * b / norm)
        # Basis of the plane: u from the axis least aligned with m, v = m x u.
        k = min(range(3), key=lambda j: abs(m[j]))
        e = [0.0, 0.0, 0.0]
        e[k] = 1.0
        dot = e[0] * m[0] + e[1] * m[1] + e[2] * m[2]
        u = (e[0] - dot * m[0], e[1] - dot * m[1], e[2] - dot * m[2])
        ul = math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
        u = (u[0] / ul, u[1] / ul, u[2] / ul)
        v = (
            m[1] * u[2] - m[2] * u[1],
            m[2] * u[0] - m[0] * u[2],
            m[0] * u[1] - m[1] * u[0],
        )
        plane_cons = []
        for j0, j1, j2, jb in cons[:i]:
            gu = j0 * u[0] + j1 * u[1] + j2 * u[2]
            gv = j0 * v[0] + j1 * v[1] + j2 * v[2]
            plane_cons.append((gu, gv, jb - (j0 * p0[0] + j1 * p0[1] + j2 * p0[2])))
        cu = c[0] * u[0] + c[1] * u[1] + c[2] * u[2]
        cv = c[0] * v[0] + c[1] * v[1] + c[2] * v[2]
        alpha, beta = _lp2(cu, cv, plane_cons, 4.0 * bound)
        x = [
            p0[0] + alpha * u[0] + beta * v[0],
            p0[1] + alpha * u[1] + beta * v[1],
            p0[2] + alpha * u[2] + beta * v[2],
        ]
    return x[0], x[1], x[2]


def _solve(program: FitProgram, s_hi: float, t_bound: float, seed: int) -> Tuple[float, float, float]:
    rows, rhs = program.rows, program.rhs
    order = list(range(len(rows)))
    random.Random(seed).shuffle(order)
    # Box facets first: the starting corner is their optimum by construction.
    cons: List[Tuple[float, float, float, float]] = [
        (-1.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0, s_hi),
        (0.0, 1.0, 0.0, t_bound),
        (0.0, -1.0, 0.0, t_bound),
        (0.0, 0.0, 1.0, t_bound),
        (0.0, 0.0, -1.0, t_bound),
    ]
    for i in order:
        r = rows[i]
        cons.append((r[0], r[1], r[2], rhs[i]))
    c = (1.0, _TIE_X, _TIE_Y)
    bound = max(s_hi, t_bound)
    return _lp3(c, cons, (s_hi, t_bound, t_bound), bound)


# ---------------------------------------------------------------------------
# Exact-rational optimality certificates.


def _exact_dual(
    rows: Sequence[Tuple[float, float, float]], subset: Sequence[int]
) -> Optional[Tuple[Fraction, ...]]:
    """Solve sum_i y_i * rows[i] = (1, 0, 0) exactly; None unless all y >= 0."""
    k = len(subset)
    # Augmented 3 x (k+1) system over Fractions, Gaussian elimination.
    mat = [[Fraction(rows[i][r]) for i in subset] + [Fraction(1 if r == 0 else 0)] for r in range(3)]
    pivots = []
    row = 0
    for col in range(k):
        sel = None
        for rr in range(row, 3):
            if mat[rr][col] != 0:
                sel = rr
                break
        if sel is None:
            continue
        mat[row], mat[sel] = mat[sel], mat[row]
        inv = 1 / mat[row][col]
        mat[row] = [v * inv for v in mat[row]]
        for rr in range(3):
            if rr != row and mat[rr][col] != 0:
                factor = mat[rr][col]
                mat[rr] = [v - factor * w for v, w in zip(mat[rr], mat[row])]
        pivots.append(col)
        row += 1
        if row == 3:
            break
    # Inconsistent if a zero row has nonzero rhs.
    for rr in range(row, 3):
        if mat[rr][k] != 0:
            return None
    y = [Fraction(0)] * k
    for rr, col in enumerate(pivots):
        y[col] = mat[rr][k]
        # Free columns stay zero; verify they do not break the equations.
        for cc in range(k):
            if cc != col and cc not in pivots and mat[rr][cc] != 0:
                return None
    if any(v < 0 for v in y):
        return None
    return tuple(y)


def _certificate(
    program: FitProgram, x: Tuple[float, float, float]
) -> Optional[Tuple[Tuple[int, float], ...]]:
    rows, rhs = program.rows, program.rhs
    s = x[0]
    resid = []
    for i, (a0, a1, a2) in enumerate(rows):
        r = rhs[i] - (a0 * x[0] + a1 * x[1] + a2 * x[2])
        if r <= _FEAS_EPS * max(1.0, abs(rhs[i])):
            resid.append((r, i))
    resid.sort()
    active = [i for _, i in resid[:8]]
    for size in (3, 2, 1):
        for subset in combinations(active, size):
            y = _exact_dual(rows, subset)
            if y is None:
                continue
            gap = sum(yk * Fraction(rhs[i]) for yk, i in zip(y, subset)) - Fraction(s)
            if abs(gap) <= Fraction(1, 10**9):
                return tuple((i, float(yk)) for i, yk in zip(subset, y))
    return None


def verify_certificate(program: FitProgram, result: FitResult) -> bool:
    """Recheck a fit result's optimality certificate in exact arithmetic.

    True only when the stored multipliers are nonnegative, reproduce the
    objective row exactly, bound the optimum within 1e-9 of s_star, and the
    primal point is feasible within 1e-9.  Never raises.
    """
    try:
        if result.multipliers is None:
            return False
        rows, rhs = program.rows, program.rhs
        x = (result.s_star, result.t_star[0], result.t_star[1])
        for (a0, a1, a2), b in zip(rows, rhs):
            if a0 * x[0] + a1 * x[1] + a2 * x[2] > b + _FEAS_EPS * max(1.0, abs(b)):
                return False
        idx = [i for i, _ in result.multipliers]
        stored = [y for _, y in result.multipliers]
        if any(y < 0 for y in stored):
            return False
        exact = _exact_dual(rows, idx)
        if exact is None:
            return False
        for ys, ye in zip(stored, exact):
            if abs(ys - float(ye)) > 1e-6 * max(1.0, abs(ys)):
                return False
        gap = sum(yk * Fraction(rhs[i]) for yk, i in zip(exact, idx)) - Fraction(result.s_star)
        return abs(gap) <= Fraction(1, 10**9)
    except Exception:
        return False


# ---------------------------------------------------------------------------
# Public entry point.


def fit_scale(P: PlanarPolygon, Q: PlanarPolygon, *, seed: int = 0, certify: bool = False) -> FitResult:
    """Largest s with s*P + t inside Q for some translation t.

    The containment is closed; callers decide fits/does-not-fit only outside
    the FIT_EPS dead band around 1.  The optimum is never negative (a point
    fits anywhere) and never unbounded (Q is bounded).  Raises NumericFailure
    if no solution passes the 1e-9 feasibility check.
    """
    program = build_fit_program(P, Q)
    diam_p = P.diameter()
    diam_q = Q.diameter()
    s_hi = diam_q / diam_p * (1.0 + 1e-9) + 1e-9
    r_p = max(math.hypot(x, y) for x, y in P.vertices)
    r_q = max(math.hypot(x, y) for x, y in Q.vertices)
    t_bound = r_q + s_hi * r_p + 1.0

    last_exc: Optional[Exception] = None
    for attempt in range(3):
        try:
            x = _solve(program, s_hi, t_bound, seed + attempt)
        except NumericFailure as exc:
            last_exc = exc
            continue
        worst = max(
            (a0 * x[0] + a1 * x[1] + a2 * x[2]) - b
            for (a0, a1, a2), b in zip(program.rows, program.rhs)
        )
        if worst <= _FEAS_EPS:
            multipliers = _certificate(program, x) if certify else None
            return FitResult(
                s_star=x[0],
                t_star=(x[1], x[2]),
                certified=multipliers is not None,
                multipliers=multipliers,
            )
        last_exc = NumericFailure(f"feasibility residual {worst:.3e} exceeds 1e-9")
    raise NumericFailure(str(last_exc))
