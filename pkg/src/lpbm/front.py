"""Pareto dominance and nondominated filtering (minimisation)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import BinarySolution, Instance, is_feasible

STRICT_TOL = 1e-9


def dominates(a, b) -> bool:
    """``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("points must have the same length")
    return bool(np.all(a <= b + STRICT_TOL) and np.any(a < b - STRICT_TOL))


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of the points not dominated by any other point.

    Equal points do not dominate each other; callers dedupe first.
    """
    pts = np.asarray(points, dtype=np.float64)
    k = len(pts)
    mask = np.ones(k, dtype=bool)
    if k == 0:
        return mask
    order = np.lexsort(pts.T[::-1])
    front_idx: list[int] = []
    for i in order:
        y = pts[i]
        if front_idx:
            f = pts[front_idx]
            if np.any(np.all(f <= y + STRICT_TOL, axis=1) & np.any(f < y - STRICT_TOL, axis=1)):
                mask[i] = False
                continue
        # Lexicographic order: a later point can never dominate an earlier one.
        front_idx.append(i)
    return mask


@dataclass
class Front:
    points: list[np.ndarray]
    preimages: list[np.ndarray]
    stats: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_dict(self, with_timing: bool = False) -> dict:
        """JSON-ready form; wall-clock figures only on request so output is reproducible."""
        stats = dict(self.stats, size=len(self.points))
        if with_timing:
            stats.update(self.timing)
        return {
            "points": [[_jsonable(v) for v in p] for p in self.points],
            "solutions": [[int(v) for v in x] for x in self.preimages],
            "stats": stats,
        }

    def to_json(self, with_timing: bool = False) -> str:
        return json.dumps(self.to_dict(with_timing), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "Front":
        points = [np.asarray(p) for p in doc.get("points", [])]
        sols = [np.asarray(x, dtype=np.int8) for x in doc.get("solutions", [])]
        if sols and len(sols) != len(points):
            raise ValueError("front document: points and solutions differ in length")
        return cls(points, sols, dict(doc.get("stats", {})))

    @classmethod
    def from_json(cls, text: str) -> "Front":
        return cls.from_dict(json.loads(text))


def _jsonable(v):
    f = float(v)
    return int(f) if f.is_integer() else f


def filter_nondominated(candidates: Iterable[BinarySolution], inst: Instance | None = None) -> Front:
    """Drop fractional, infeasible (when ``inst`` is given), duplicate and dominated candidates.

    The result is sorted by image, lexicographically.  Equal images keep the
    first preimage seen.
    """
    kept: list[BinarySolution] = []
    seen_images: set[tuple] = set()
    for sol in candidates:
        x = np.asarray(sol.x)
        if not np.all((x == 0) | (x == 1)):
            continue
        if inst is not None and not is_feasible(inst, x):
            continue
        key = tuple(float(v) for v in sol.objectives)
        if key in seen_images:
            continue
        seen_images.add(key)
        kept.append(sol)
    if not kept:
        return Front([], [])
    pts = np.array([s.objectives for s in kept])
    mask = nondominated_mask(pts)
    survivors = [s for s, keep in zip(kept, mask) if keep]
    survivors.sort(key=lambda s: tuple(float(v) for v in s.objectives))
    return Front([s.objectives for s in survivors],
                 [np.asarray(s.x).astype(np.int8) for s in survivors])


def front_solutions(front: Front) -> list[BinarySolution]:
    return [BinarySolution(x, np.asarray(p)) for p, x in zip(front.points, front.preimages)]


def union_points(fronts: Sequence[Front]) -> np.ndarray:
    """Nondominated union of several fronts' points (no preimages needed)."""
    pts = [np.asarray(p, dtype=np.float64) for f in fronts for p in f.points]
    if not pts:
        return np.zeros((0, 0))
    arr = np.unique(np.array(pts), axis=0)
    return arr[nondominated_mask(arr)]
