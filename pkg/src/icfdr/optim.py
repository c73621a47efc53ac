"""Deterministic derivative-free maximization/minimization over box and
disk-constrained spaces: a coarse lattice scan followed by compass pattern
search with step halving.

Objectives are batched: ``objective(points)`` takes an (N, d) array and
returns N values.  Larger is better for :func:`grid_then_refine`;
:func:`minimize` negates.  Non-finite values (NaN, -inf after negation)
are treated as worst, which lets objectives reject infeasible points.

Everything here is deterministic given the space, config and seed: lattice
nodes are evaluated in lexicographic order, ties break toward the
lexicographically smallest point, and pattern-search proposals are scanned
in a fixed direction order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class DiskConstraint:
    """Euclidean ball constraint on a subset of dimensions."""

    dims: tuple[int, ...]
    radius: float = 1.0


@dataclass(frozen=True)
class SearchSpace:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    disk: DiskConstraint | None = None

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have equal length")
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"lower bound {lo} exceeds upper bound {hi}")
        if self.disk is not None:
            for d in self.disk.dims:
                if not 0 <= d < len(self.lower):
                    raise ValueError(f"disk dimension {d} out of range")

    @property
    def dim(self) -> int:
        return len(self.lower)


@dataclass(frozen=True)
class SearchConfig:
    points_per_axis: int | None = None  # default depends on dimension
    refine_tol: float = 1e-6
    n_starts: int = 1
    max_rounds: int = 400
    # an improving move this small (relative) still halves the step, so
    # shallow-valley crawls terminate instead of exhausting max_rounds
    stall_rel_tol: float = 1e-10
    seed: int = 0
    keep_trace: bool = False


@dataclass(frozen=True, eq=False)
class SearchResult:
    point: np.ndarray
    value: float
    evaluations: int
    converged: bool
    seed: int
    trace: tuple[float, ...] | None = None


class EmptyFeasibleSetError(Exception):
    """No evaluated point produced a finite objective value."""


def default_points_per_axis(dim: int) -> int:
    if dim <= 3:
        return 9
    if dim <= 5:
        return 5
    return 3


def _project(space: SearchSpace, pts: np.ndarray) -> np.ndarray:
    """Clip to the box, then radially project disk-constrained dims onto
    the disk boundary when outside."""
    pts = np.clip(pts, space.lower, space.upper)
    if space.disk is not None:
        dims = list(space.disk.dims)
        sub = pts[:, dims]
        norm = np.sqrt(np.sum(sub * sub, axis=1))
        outside = norm > space.disk.radius
        if np.any(outside):
            scale = np.ones_like(norm)
            scale[outside] = space.disk.radius / norm[outside]
            pts = pts.copy()
            pts[:, dims] = sub * scale[:, None]
    return pts


@lru_cache(maxsize=64)
def _lattice_cached(space: SearchSpace, points_per_axis: int) -> np.ndarray:
    axes = [
        np.linspace(lo, hi, points_per_axis) if points_per_axis > 1 else np.array([(lo + hi) / 2.0])
        for lo, hi in zip(space.lower, space.upper)
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = _project(space, pts)
    pts = np.unique(pts, axis=0)  # projection can collapse nodes; keep one copy
    pts.setflags(write=False)
    return pts


def _pitch(space: SearchSpace, points_per_axis: int) -> np.ndarray:
    widths = np.asarray(space.upper, dtype=float) - np.asarray(space.lower, dtype=float)
    return widths / max(points_per_axis - 1, 1)


def _eval(objective, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(objective(pts), dtype=float)
    if vals.shape != (pts.shape[0],):
        raise ValueError("objective must return one value per point")
    return np.where(np.isnan(vals), -np.inf, vals)


def _lex_best(pts: np.ndarray, vals: np.ndarray, n: int) -> list[int]:
    """Indices of the n best values; ties broken by lexicographic point order."""
    n = min(n, vals.size)
    if n < vals.size:
        kth = np.partition(vals, vals.size - n)[vals.size - n]
        cand = np.flatnonzero(vals >= kth)
    else:
        cand = np.arange(vals.size)
    keys = tuple(pts[cand, d] for d in reversed(range(pts.shape[1]))) + (-vals[cand],)
    ranked = cand[np.lexsort(keys)]
    picked: list[int] = []
    seen: set[tuple] = set()
    for i in ranked:
        key = tuple(pts[i])
        if key in seen:
            continue
        seen.add(key)
        picked.append(int(i))
        if len(picked) == n:
            break
    return picked


def _refine(objective, space: SearchSpace, starts: np.ndarray, start_vals: np.ndarray,
            pitch: np.ndarray, cfg: SearchConfig, trace: list | None):
    """Lock-step compass pattern search from several starts (maximizing).
    Returns (best_point, best_value, evaluations, converged)."""
    dim = space.dim
    n = starts.shape[0]
    xs = starts.copy()
    fs = start_vals.copy()
    factor = np.ones(n)
    active = np.ones(n, dtype=bool)
    move_dims = np.flatnonzero(np.asarray(pitch) > 0.0)
    per = 2 * move_dims.size
    # compass displacement template, scaled per start by its step factor
    template = np.zeros((per, dim))
    for k, d in enumerate(move_dims):
        template[2 * k, d] = pitch[d]
        template[2 * k + 1, d] = -pitch[d]
    max_pitch = float(np.max(pitch[move_dims])) if move_dims.size else 0.0
    evals = 0
    rounds = 0
    while np.any(active) and rounds < cfg.max_rounds and per > 0:
        rounds += 1
        idx_active = np.flatnonzero(active)
        block = xs[idx_active, None, :] + factor[idx_active, None, None] * template[None, :, :]
        block = _project(space, block.reshape(-1, dim))
        vals = _eval(objective, block)
        evals += block.shape[0]
        vals = vals.reshape(idx_active.size, per)
        best_j = np.argmax(vals, axis=1)  # first index wins ties
        best_v = vals[np.arange(idx_active.size), best_j]
        for slot, i in enumerate(idx_active):
            gain = best_v[slot] - fs[i]
            if gain > 0.0:
                xs[i] = block[slot * per + best_j[slot]]
                fs[i] = best_v[slot]
            if gain <= cfg.stall_rel_tol * max(1.0, abs(fs[i])):
                factor[i] *= 0.5
                if factor[i] * max_pitch < cfg.refine_tol:
                    active[i] = False
        if trace is not None:
            trace.append(float(np.max(fs)))
    best = _lex_best(xs, fs, 1)[0]
    return xs[best], float(fs[best]), evals, not np.any(active)


def grid_then_refine(objective, space: SearchSpace, config: SearchConfig | None = None) -> SearchResult:
    """Maximize a batched objective: lattice scan, then pattern search
    around the best lattice nodes."""
    cfg = config or SearchConfig()
    ppa = cfg.points_per_axis or default_points_per_axis(space.dim)
    pts = _lattice_cached(space, ppa)
    vals = _eval(objective, pts)
    evals = pts.shape[0]
    trace: list | None = [] if cfg.keep_trace else None
    if trace is not None:
        trace.append(float(np.max(vals)))
    if not np.any(np.isfinite(vals)):
        raise EmptyFeasibleSetError("no feasible point on the search lattice")
    n_starts = min(cfg.n_starts, pts.shape[0])
    starts_idx = _lex_best(pts, vals, n_starts)
    pitch = _pitch(space, ppa)
    point, value, refine_evals, converged = _refine(
        objective, space, pts[starts_idx], vals[starts_idx], pitch, cfg, trace
    )
    if not math.isfinite(value):
        raise EmptyFeasibleSetError("pattern search found no feasible point")
    return SearchResult(
        point=point,
        value=value,
        evaluations=evals + refine_evals,
        converged=converged,
        seed=cfg.seed,
        trace=tuple(trace) if trace is not None else None,
    )


def refine_from(objective, space: SearchSpace, start: np.ndarray, step: np.ndarray,
                config: SearchConfig | None = None, max_evals: int | None = None) -> SearchResult:
    """Pattern search only, from a given start with a given initial step.
    ``max_evals`` caps the number of objective evaluations (approximately,
    rounded up to whole rounds)."""
    cfg = config or SearchConfig()
    start = _project(space, np.asarray(start, dtype=float)[None, :])[0]
    v0 = float(_eval(objective, start[None, :])[0])
    per_round = 2 * int(np.sum(np.asarray(step) > 0.0))
    rounds = cfg.max_rounds
    if max_evals is not None and per_round > 0:
        rounds = min(rounds, max(1, max_evals // per_round))
    local_cfg = SearchConfig(
        points_per_axis=cfg.points_per_axis, refine_tol=cfg.refine_tol,
        n_starts=1, max_rounds=rounds, seed=cfg.seed,
    )
    point, value, evals, converged = _refine(
        objective, space, start[None, :], np.array([v0]), np.asarray(step, dtype=float),
        local_cfg, None,
    )
    return SearchResult(point=point, value=value, evaluations=evals + 1,
                        converged=converged, seed=cfg.seed)


def minimize(objective, space: SearchSpace, config: SearchConfig | None = None) -> SearchResult:
    """Minimize a batched objective (grid_then_refine on its negation)."""

    def negated(pts):
        return -np.asarray(objective(pts), dtype=float)

    res = grid_then_refine(negated, space, config)
    return SearchResult(
        point=res.point,
        value=-res.value,
        evaluations=res.evaluations,
        converged=res.converged,
        seed=res.seed,
        trace=tuple(-t for t in res.trace) if res.trace is not None else None,
    )


def from_scalar(f):
    """Adapt a scalar objective f(point)->float to the batched interface."""

    def batched(pts):
        return np.array([f(p) for p in pts], dtype=float)

    return batched
