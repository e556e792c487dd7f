"""Orthtree sweep of the orientation parameter space.

The space LAMBDA tiles into 32 initial 5-cubes of side pi/2.  Cubes are
processed first-in-first-out: a cube smaller than the configured minimum
side is set aside untested, otherwise check() runs at its center with the
decay threshold tied to the cube size.  A cube is ruled out when the
certification succeeds at a radius of at least half its side (so the
certified neighborhood covers the whole cube); undecided cubes split into
their 32 half-side children and rejoin the queue.  Passages found at cube
centers are recorded and the sweep continues.

Because every cube's fate depends only on the cube itself, results are
identical for any worker count; workers only change the wall time.  The
queue is held as one uniform-depth level at a time with children generated
lazily, which keeps memory flat even when millions of cubes are pending.
"""

from __future__ import annotations

import base64
import itertools
import json
import math
import multiprocessing
import os
import time
import zlib
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .certify import (
    BUFFER_MODES,
    BUFFER_VERTEX,
    EXHAUSTED,
    INVALID,
    RULED_OUT,
    CheckConfig,
    CertOutcome,
    check,
)
from .polyhedron import LAMBDA_VOLUME, ParamPoint, Polyhedron

SMALL = "small"

HALF_PI = 0.5 * math.pi
# Cube counts per axis of the initial side-pi/2 tiling of LAMBDA,
# axis order (alpha, theta, phi, theta_p, phi_p).
_AXIS_CELLS = (4, 1, 2, 1, 4)

CHECKPOINT_VERSION = 2


class CheckpointCorrupt(RuntimeError):
    """Resume file unreadable or inconsistent with the requested run."""


@dataclass(frozen=True)
class Box5:
    """Axis-aligned 5-cube in LAMBDA, addressed on an integer grid."""

    depth: int
    idx: Tuple[int, int, int, int, int]

    @property
    def side(self) -> float:
        return HALF_PI / (1 << self.depth)

    @property
    def center(self) -> Tuple[float, float, float, float, float]:
        s = self.side
        return tuple((i + 0.5) * s for i in self.idx)

    def center_point(self) -> ParamPoint:
        return ParamPoint(*self.center)

    @property
    def volume(self) -> float:
        return self.side**5


def initial_decomposition() -> List[Box5]:
    """The 32 side-pi/2 cubes tiling LAMBDA, in fixed axis-major order."""
    return [Box5(0, idx) for idx in itertools.product(*(range(n) for n in _AXIS_CELLS))]


def split(box: Box5) -> List[Box5]:
    """The 32 half-side children exactly tiling the box."""
    base = tuple(2 * i for i in box.idx)
    return [
        Box5(box.depth + 1, tuple(b + o for b, o in zip(base, offs)))
        for offs in itertools.product((0, 1), repeat=5)
    ]


def _depth_side(depth: int) -> float:
    return HALF_PI / (1 << depth)


@dataclass
class SearchConfig:
    min_side: float
    buffer_mode: str = BUFFER_VERTEX
    workers: int = 1
    threshold_factor: float = 0.9
    delta_init: float = 0.25
    decay: float = 0.8
    certify_ruled_out: bool = True
    max_checks: Optional[int] = None
    results_path: Optional[str] = None
    checkpoint_path: Optional[str] = None
    checkpoint_every_boxes: int = 10000
    checkpoint_every_seconds: float = 60.0

    def __post_init__(self) -> None:
        if self.min_side <= 0:
            raise ValueError("min_side must be positive")
        if self.buffer_mode not in BUFFER_MODES:
            raise ValueError(f"buffer_mode must be one of {BUFFER_MODES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not (0.0 < self.threshold_factor < 1.0):
            raise ValueError("threshold_factor must be in (0, 1)")

    def fingerprint(self) -> Dict[str, object]:
        """The fields that must match for a checkpoint to be resumable."""
        return {
            "min_side": self.min_side,
            "buffer_mode": self.buffer_mode,
            "threshold_factor": self.threshold_factor,
            "delta_init": self.delta_init,
            "decay": self.decay,
            "certify_ruled_out": self.certify_ruled_out,
        }


@dataclass
class SearchState:
    """Tallies plus the exact position inside the level-by-level queue."""

    depth: int = 0
    parents: Optional[List[Tuple[int, ...]]] = None  # None: initial level
    ppos: int = 0
    cpos: int = 0
    next_parents: List[Tuple[int, ...]] = field(default_factory=list)
    ruled_by_depth: Dict[int, int] = field(default_factory=dict)
    small_by_depth: Dict[int, int] = field(default_factory=dict)
    invalid_by_depth: Dict[int, int] = field(default_factory=dict)
    invalid_points: List[Tuple[Tuple[float, float, float, float, float], float]] = field(default_factory=list)
    checks_run: int = 0
    boxes_finalized: int = 0
    results_bytes: int = 0
    wall_time: float = 0.0
    done: bool = False

    # -- volumes ----------------------------------------------------------
    def ruled_out_volume(self) -> float:
        return sum(
            count * _depth_side(d) ** 5 for d, count in sorted(self.ruled_by_depth.items())
        )

    def small_volume(self) -> float:
        total = sum(count * _depth_side(d) ** 5 for d, count in sorted(self.small_by_depth.items()))
        total += sum(
            count * _depth_side(d) ** 5 for d, count in sorted(self.invalid_by_depth.items())
        )
        return total

    def coverage(self) -> float:
        return self.ruled_out_volume() / LAMBDA_VOLUME

    def invalid_count(self) -> int:
        return sum(self.invalid_by_depth.values())


def _pending_volume(state: SearchState) -> float:
    side = _depth_side(state.depth)
    if state.parents is None:
        remaining = 32 - state.ppos
    else:
        remaining = 32 * (len(state.parents) - state.ppos) - state.cpos
    child_vol = (side / 2.0) ** 5
    return remaining * side**5 + len(state.next_parents) * 32 * child_vol


def tallies_report(
    ruled: Dict[int, int],
    small: Dict[int, int],
    invalid: Dict[int, int],
    complete: bool,
    wall_time: Optional[float],
) -> Dict[str, object]:
    """Canonical report from per-depth tallies.

    Both the live search state and a re-read of the results file build
    their reports through this one function, so the two agree bit for bit
    on every field except the informational wall_time.
    """
    ruled_vol = sum(c * _depth_side(d) ** 5 for d, c in sorted(ruled.items()))
    small_vol = sum(c * _depth_side(d) ** 5 for d, c in sorted(small.items()))
    small_vol += sum(c * _depth_side(d) ** 5 for d, c in sorted(invalid.items()))
    pending = LAMBDA_VOLUME - ruled_vol - small_vol
    depths = sorted(set(ruled) | set(small) | set(invalid))
    by_depth = {
        str(d): {
            "ruled_out": ruled.get(d, 0),
            "small": small.get(d, 0),
            "invalid": invalid.get(d, 0),
        }
        for d in depths
    }
    return {
        "total_volume": LAMBDA_VOLUME,
        "ruled_out_volume": ruled_vol,
        "small_volume": small_vol,
        "pending_volume": pending,
        "coverage_percent": 100.0 * ruled_vol / LAMBDA_VOLUME,
        "cube_count_by_depth": by_depth,
        "invalid_count": sum(invalid.values()),
        "complete": complete,
        "wall_time": wall_time,
    }


def coverage_report(state: SearchState) -> Dict[str, object]:
    """Summary tallies; wall_time is informational and never compared."""
    return tallies_report(
        state.ruled_by_depth,
        state.small_by_depth,
        state.invalid_by_depth,
        state.done,
        state.wall_time,
    )


# ---------------------------------------------------------------------------
# Results file (JSON lines).


def format_box_record(
    box: Box5,
    status: str,
    delta_success: Optional[float],
    passage_scale: Optional[float],
) -> str:
    center = ",".join(f"{c:.17g}" for c in box.center)
    ds = "null" if delta_success is None else f"{delta_success:.17g}"
    ps = "null" if passage_scale is None else f"{passage_scale:.17g}"
    return (
        f'{{"center":[{center}],"side":{box.side:.17g},"status":"{status}",'
        f'"delta_success":{ds},"passage_scale":{ps}}}'
    )


# ---------------------------------------------------------------------------
# Checkpoints.


def _encode_parents(parents: Sequence[Tuple[int, ...]]) -> str:
    flat = ",".join(",".join(map(str, p)) for p in parents)
    return base64.b64encode(zlib.compress(flat.encode())).decode()


def _decode_parents(blob: str) -> List[Tuple[int, ...]]:
    flat = zlib.decompress(base64.b64decode(blob)).decode()
    if not flat:
        return []
    vals = list(map(int, flat.split(",")))
    return [tuple(vals[i : i + 5]) for i in range(0, len(vals), 5)]


def save_checkpoint(path: str, state: SearchState, cfg: SearchConfig, poly_hash: str) -> None:
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": cfg.fingerprint(),
        "poly_hash": poly_hash,
        "depth": state.depth,
        "parents": None if state.parents is None else _encode_parents(state.parents),
        "ppos": state.ppos,
        "cpos": state.cpos,
        "next_parents": _encode_parents(state.next_parents),
        "ruled_by_depth": state.ruled_by_depth,
        "small_by_depth": state.small_by_depth,
        "invalid_by_depth": state.invalid_by_depth,
        "invalid_points": state.invalid_points,
        "checks_run": state.checks_run,
        "boxes_finalized": state.boxes_finalized,
        "results_bytes": state.results_bytes,
        "wall_time": state.wall_time,
        "done": state.done,
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def load_checkpoint(path: str, cfg: SearchConfig, poly_hash: str) -> SearchState:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CheckpointCorrupt(f"cannot read checkpoint {path}: {exc}") from None
    try:
        if payload["format_version"] != CHECKPOINT_VERSION:
            raise CheckpointCorrupt(
                f"checkpoint format {payload.get('format_version')} unsupported"
            )
        if payload["poly_hash"] != poly_hash:
            raise CheckpointCorrupt("checkpoint belongs to a different polyhedron")
        if payload["config"] != {k: v for k, v in cfg.fingerprint().items()}:
            raise CheckpointCorrupt("checkpoint config does not match this run")
        state = SearchState(
            depth=payload["depth"],
            parents=None if payload["parents"] is None else _decode_parents(payload["parents"]),
            ppos=payload["ppos"],
            cpos=payload["cpos"],
            next_parents=_decode_parents(payload["next_parents"]),
            ruled_by_depth={int(k): v for k, v in payload["ruled_by_depth"].items()},
            small_by_depth={int(k): v for k, v in payload["small_by_depth"].items()},
            invalid_by_depth={int(k): v for k, v in payload["invalid_by_depth"].items()},
            invalid_points=[(tuple(pt), sc) for pt, sc in payload["invalid_points"]],
            checks_run=payload["checks_run"],
            boxes_finalized=payload["boxes_finalized"],
            results_bytes=payload["results_bytes"],
            wall_time=payload["wall_time"],
            done=payload["done"],
        )
    except CheckpointCorrupt:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointCorrupt(f"checkpoint {path} is malformed: {exc}") from None
    return state


# ---------------------------------------------------------------------------
# Worker pool plumbing.

_worker_poly: Optional[Polyhedron] = None
_worker_cfg: Optional[SearchConfig] = None


def _init_worker(vertices, label, cfg: SearchConfig) -> None:
    global _worker_poly, _worker_cfg
    _worker_poly = Polyhedron(vertices, label=label, validate=False)
    _worker_cfg = cfg


def _check_box(task: Tuple[int, Tuple[int, ...]]):
    depth, idx = task
    box = Box5(depth, idx)
    cfg = _worker_cfg
    out = check(
        box.center_point(),
        _worker_poly,
        CheckConfig(
            delta_init=cfg.delta_init,
            decay=cfg.decay,
            threshold_b=cfg.threshold_factor * box.side / 2.0,
            buffer_mode=cfg.buffer_mode,
            certify_ruled_out=cfg.certify_ruled_out,
        ),
    )
    return (out.kind, out.delta_success, out.passage_scale)


def _outcome_inline(poly: Polyhedron, cfg: SearchConfig, task) -> Tuple[str, Optional[float], Optional[float]]:
    global _worker_poly, _worker_cfg
    _worker_poly = poly
    _worker_cfg = cfg
    return _check_box(task)


class _Level:
    """Iterator over one uniform-depth level with a serializable cursor."""

    def __init__(self, state: SearchState):
        self.state = state

    def remaining(self) -> bool:
        st = self.state
        if st.parents is None:
            return st.ppos < 32
        return st.ppos < len(st.parents)

    def take(self, n: int) -> List[Tuple[int, Tuple[int, ...]]]:
        st = self.state
        out: List[Tuple[int, Tuple[int, ...]]] = []
        if st.parents is None:
            initial = initial_decomposition()
            while n > 0 and st.ppos < 32:
                out.append((0, initial[st.ppos].idx))
                st.ppos += 1
                n -= 1
            return out
        offsets = list(itertools.product((0, 1), repeat=5))
        while n > 0 and st.ppos < len(st.parents):
            parent = st.parents[st.ppos]
            base = tuple(2 * i for i in parent)
            while n > 0 and st.cpos < 32:
                offs = offsets[st.cpos]
                out.append((st.depth, tuple(b + o for b, o in zip(base, offs))))
                st.cpos += 1
                n -= 1
            if st.cpos == 32:
                st.cpos = 0
                st.ppos += 1
        return out


def run_search(
    poly: Polyhedron,
    cfg: SearchConfig,
    resume_from: Optional[str] = None,
    log=None,
) -> SearchState:
    """Drive the sweep to completion (or to the configured check budget).

    Writes one JSON line per finalized cube to cfg.results_path as it goes
    and checkpoints periodically.  Identical configs produce identical
    states and result files regardless of cfg.workers.
    """
    poly_hash = poly.vertex_hash()
    if resume_from is not None:
        state = load_checkpoint(resume_from, cfg, poly_hash)
    else:
        state = SearchState()

    results_fh = None
    if cfg.results_path is not None:
        if resume_from is not None and os.path.exists(cfg.results_path):
            results_fh = open(cfg.results_path, "r+")
            results_fh.truncate(state.results_bytes)
            results_fh.seek(state.results_bytes)
        else:
            results_fh = open(cfg.results_path, "w")
            state.results_bytes = 0

    def emit(line: str) -> None:
        if results_fh is not None:
            results_fh.write(line + "\n")
            state.results_bytes += len(line) + 1

    seg_start = time.monotonic()
    last_ckpt_time = seg_start
    last_ckpt_checks = state.checks_run

    def maybe_checkpoint() -> None:
        nonlocal last_ckpt_time, last_ckpt_checks, seg_start
        if cfg.checkpoint_path is None:
            return
        now = time.monotonic()
        due = (
            state.checks_run - last_ckpt_checks >= cfg.checkpoint_every_boxes
            or now - last_ckpt_time >= cfg.checkpoint_every_seconds
        )
        if not due:
            return
        if results_fh is not None:
            results_fh.flush()
        # wall_time accumulates finished segments; restart the segment clock.
        state.wall_time += now - seg_start
        seg_start = now
        save_checkpoint(cfg.checkpoint_path, state, cfg, poly_hash)
        last_ckpt_time = now
        last_ckpt_checks = state.checks_run

    pool = None
    if cfg.workers > 1:
        pool = multiprocessing.get_context("fork").Pool(
            cfg.workers, initializer=_init_worker, initargs=(poly.vertices, poly.label, cfg)
        )

    try:
        while not state.done:
            level = _Level(state)
            side = _depth_side(state.depth)
            if side < cfg.min_side:
                # Terminal level: every cube is finalized untested.
                while level.remaining():
                    for depth, idx in level.take(65536):
                        box = Box5(depth, idx)
                        state.small_by_depth[depth] = state.small_by_depth.get(depth, 0) + 1
                        state.boxes_finalized += 1
                        emit(format_box_record(box, SMALL, None, None))
                    maybe_checkpoint()
                state.next_parents = []
                state.done = True
                break

            budget_hit = False
            while level.remaining():
                if cfg.max_checks is not None and state.checks_run >= cfg.max_checks:
                    budget_hit = True
                    break
                batch_size = 256 * cfg.workers
                if cfg.max_checks is not None:
                    batch_size = min(batch_size, cfg.max_checks - state.checks_run)
                tasks = level.take(batch_size)
                if pool is not None:
                    outcomes = pool.map(_check_box, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers)))
                else:
                    outcomes = [_outcome_inline(poly, cfg, t) for t in tasks]
                for (depth, idx), (kind, delta_success, passage_scale) in zip(tasks, outcomes):
                    box = Box5(depth, idx)
                    state.checks_run += 1
                    if kind == INVALID:
                        state.invalid_by_depth[depth] = state.invalid_by_depth.get(depth, 0) + 1
                        state.invalid_points.append((box.center, passage_scale))
                        state.boxes_finalized += 1
                        emit(format_box_record(box, INVALID, None, passage_scale))
                        if log:
                            log(f"passage found at {box.center} scale {passage_scale:.6f}")
                    elif (
                        kind == RULED_OUT
                        and delta_success is not None
                        and delta_success >= box.side / 2.0
                    ):
                        state.ruled_by_depth[depth] = state.ruled_by_depth.get(depth, 0) + 1
                        state.boxes_finalized += 1
                        emit(format_box_record(box, RULED_OUT, delta_success, None))
                    else:
                        state.next_parents.append(idx)
                maybe_checkpoint()
            if budget_hit:
                break
            # Advance to the next level.
            state.depth += 1
            state.parents = state.next_parents
            state.next_parents = []
            state.ppos = 0
            state.cpos = 0
            if not state.parents:
                state.done = True
                break
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        state.wall_time += time.monotonic() - seg_start
        if cfg.checkpoint_path is not None:
            save_checkpoint(cfg.checkpoint_path, state, cfg, poly_hash)
        if results_fh is not None:
            results_fh.flush()
            results_fh.close()
    return state
