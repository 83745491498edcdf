"""Lower bound set of the LP relaxation.

The extreme supported points of the relaxation's nondominated frontier are
found by outer approximation: the current images, together with far-shifted
copies standing in for the recession directions, are hulled; every lower
facet (nonnegative inward normal) is then either confirmed by a weighted-sum
LP or cut off by the new vertex that LP returns.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .model import Instance
from .simplex import LpProblem, LpResult, solve_lp

log = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
MERGE_TOL = 1e-6
NORMAL_TOL = 1e-9


class InfeasibleError(RuntimeError):
    """The LP relaxation of the instance has no feasible point."""


class LpFailure(RuntimeError):
    """The simplex hit its iteration limit."""


@dataclass(eq=False)
class RelaxedSolution:
    x: np.ndarray
    image: np.ndarray

    @property
    def is_integral(self) -> bool:
        return bool(np.all(np.minimum(np.abs(self.x), np.abs(1 - self.x)) <= INTEGRALITY_TOL))


@dataclass(eq=False)
class BoundSet:
    solutions: list[RelaxedSolution]
    complete: bool = True
    iterations: int = 0
    lp_solves: int = 0
    history: list[int] = field(default_factory=list)
    # every image found, in discovery order, before dominated ones were stripped;
    # history[i] is how many of them existed after round i
    found_images: np.ndarray | None = None

    def __len__(self):
        return len(self.solutions)

    @property
    def images(self) -> np.ndarray:
        return np.array([s.image for s in self.solutions])

    @property
    def fractionality(self) -> float:
        return fractionality(self)


def relaxation(inst: Instance, objective) -> LpProblem:
    return LpProblem(objective, inst.matrix, inst.row_senses, inst.rhs)


def relaxed_solution(inst: Instance, x) -> RelaxedSolution:
    """Snap numerical noise to the box and attach the image."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    x[np.abs(x) <= 1e-9] = 0.0
    x[np.abs(x - 1) <= 1e-9] = 1.0
    return RelaxedSolution(x, inst.objectives @ x)


def _check(res: LpResult) -> LpResult:
    if res.status == "infeasible":
        raise InfeasibleError("LP relaxation is infeasible")
    if not res.optimal:
        raise LpFailure(f"simplex stopped with status {res.status}")
    return res


def supported_point(inst: Instance, w) -> RelaxedSolution:
    """Vertex minimiser of ``w . Cx`` over the relaxation."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (inst.p,) or np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative, not all zero, one per objective")
    res = _check(solve_lp(relaxation(inst, w @ inst.objectives)))
    return relaxed_solution(inst, res.x)


def fractionality(bs: BoundSet) -> float:
    if not bs.solutions:
        raise ValueError("fractionality of an empty bound set")
    frac = sum(not s.is_integral for s in bs.solutions)
    return frac / len(bs.solutions)


class _ImageSet:
    def __init__(self):
        self.solutions: list[RelaxedSolution] = []

    def images(self) -> np.ndarray:
        return np.array([s.image for s in self.solutions])

    def add(self, sol: RelaxedSolution) -> bool:
        if self.solutions:
            gap = np.abs(self.images() - sol.image).max(axis=1)
            if gap.min() <= MERGE_TOL:
                return False
        self.solutions.append(sol)
        return True


def _strip_dominated(sols: list[RelaxedSolution]) -> list[RelaxedSolution]:
    if not sols:
        return sols
    imgs = np.array([s.image for s in sols])
    keep = []
    for i, y in enumerate(imgs):
        weak = np.all(imgs <= y + MERGE_TOL, axis=1)
        strict = np.any(imgs < y - MERGE_TOL, axis=1)
        if not np.any(weak & strict):
            keep.append(sols[i])
    return keep


def compute_lb_set(inst: Instance, time_limit: float = 600.0) -> BoundSet:
    """Extreme supported points of the LP relaxation with their vertex preimages.

    ``complete`` is False when ``time_limit`` seconds ran out before every
    lower facet was confirmed; the points found so far are still valid.
    """
    if inst.p == 2:
        return _dichotomic(inst, time_limit)
    if inst.p != 3:
        raise NotImplementedError("lower bound sets are implemented for p = 2 and p = 3")

    start = time.perf_counter()
    deadline = start + time_limit
    found = _ImageSet()
    lp_solves = 0
    history = []

    seeds = [np.eye(3)[k] for k in range(3)] + [np.full(3, 1 / 3)]
    for w in seeds:
        found.add(supported_point(inst, w))
        lp_solves += 1
    history.append(len(found.solutions))

    # Far shift per objective: ten times the objective's range over the unit box.
    box_range = np.abs(inst.objectives).sum(axis=1).astype(np.float64)
    shift = 10.0 * box_range + 1.0

    confirmed: set[tuple] = set()
    complete = False
    iterations = 0
    while True:
        iterations += 1
        imgs = found.images()
        pts = np.vstack([imgs] + [imgs + shift[k] * np.eye(3)[k] for k in range(3)])
        hull = ConvexHull(pts)
        inward = -hull.equations[:, :3]
        lower = inward[np.all(inward >= -NORMAL_TOL, axis=1)]
        lower = np.clip(lower, 0.0, None)
        lower = lower / lower.sum(axis=1, keepdims=True)
        keys = sorted({tuple(np.round(w, 9)) for w in lower} - confirmed)
        if not keys:
            complete = True
            break

        added = False
        timed_out = False
        for key in keys:
            if time.perf_counter() > deadline:
                timed_out = True
                break
            w = np.array(key)
            w = w / w.sum()
            offset = float((found.images() @ w).min())
            sol = supported_point(inst, w)
            lp_solves += 1
            if w @ sol.image < offset - 1e-7 * (1 + abs(offset)):
                added |= found.add(sol)
            else:
                confirmed.add(key)
        history.append(len(found.solutions))
        if timed_out:
            break
        if not added and not (set(keys) - confirmed):
            complete = True
            break

    sols = _strip_dominated(found.solutions)
    if not sols:
        raise RuntimeError("no lower bound points found within the time limit")
    log.debug("lb set: %d points, %d LPs, %d rounds, complete=%s",
              len(sols), lp_solves, iterations, complete)
    return BoundSet(sols, complete, iterations, lp_solves, history, found.images())


def _dichotomic(inst: Instance, time_limit: float) -> BoundSet:
    """Bi-objective case: recursive weight bisection between neighbouring points."""
    deadline = time.perf_counter() + time_limit
    found = _ImageSet()
    a = supported_point(inst, np.array([1.0, 0.0]))
    b = supported_point(inst, np.array([0.0, 1.0]))
    found.add(a)
    found.add(b)
    lp_solves = 2
    complete = True
    stack = [(a, b)]
    while stack:
        if time.perf_counter() > deadline:
            complete = False
            break
        left, right = stack.pop()
        w = np.array([left.image[1] - right.image[1], right.image[0] - left.image[0]])
        if np.any(w < -NORMAL_TOL) or w.sum() <= MERGE_TOL:
            continue
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        sol = supported_point(inst, w)
        lp_solves += 1
        offset = float(w @ left.image)
        if w @ sol.image < offset - 1e-7 * (1 + abs(offset)) and found.add(sol):
            stack.append((sol, right))
            stack.append((left, sol))
    trail = found.images()
    sols = _strip_dominated(found.solutions)
    sols.sort(key=lambda s: tuple(s.image))
    return BoundSet(sols, complete, 1, lp_solves, [len(trail)], trail)


def bound_covers(bs: BoundSet, y, tol: float = 1e-6) -> bool:
    """True when some point of conv(images) is componentwise <= ``y + tol``.

    This is the lower-bound test against the frontier spanned by the
    extreme points, not against the extreme points alone.
    """
    imgs = bs.images
    k = len(imgs)
    p = imgs.shape[1]
    mat = np.vstack([imgs.T, np.ones((1, k))])
    rhs = np.concatenate([np.asarray(y, dtype=np.float64) + tol, [1.0]])
    prob = LpProblem(np.zeros(k), mat, ["<="] * p + ["="], rhs)
    return solve_lp(prob).optimal
